//! Product-space network construction: maximum spanning forest, threshold
//! overlay edges, giant-component sweep, hierarchical matrix ordering and
//! graph-file export.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};

use serde::Serialize;

use crate::ingest::ProductMeta;
use crate::proximity::ProximityMatrix;
use crate::specialization::SpecializationMatrix;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeTag {
    Mst,
    Overlay,
}

impl EdgeTag {
    pub fn as_str(self) -> &'static str {
        match self {
            EdgeTag::Mst => "mst",
            EdgeTag::Overlay => "overlay",
        }
    }
}

impl std::str::FromStr for EdgeTag {
    type Err = Error;
    fn from_str(s: &str) -> Result<EdgeTag> {
        match s {
            "mst" => Ok(EdgeTag::Mst),
            "overlay" => Ok(EdgeTag::Overlay),
            other => Err(Error::InvalidArgument(format!("unknown edge tag '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphNode {
    pub code: String,
    pub name: Option<String>,
    pub leamer_class: Option<String>,
    /// Specialization flag for regional overlays (Fig-2 style exports).
    pub rca: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphEdge {
    pub i: usize,
    pub j: usize,
    pub phi: f64,
    pub tag: EdgeTag,
}

/// Undirected weighted product network: a maximum spanning forest plus
/// threshold overlay edges. Edge endpoints always satisfy `i < j`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductGraph {
    pub nodes: Vec<GraphNode>,
    pub edges: Vec<GraphEdge>,
}

impl ProductGraph {
    pub fn node_index(&self, code: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.code == code)
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        self.edges.iter().any(|e| e.i == a && e.j == b)
    }

    /// Attaches names and Leamer classes from a metadata table.
    pub fn apply_metadata(&mut self, meta: &[ProductMeta]) {
        let by_code: BTreeMap<&str, &ProductMeta> =
            meta.iter().map(|m| (m.product.as_str(), m)).collect();
        for node in &mut self.nodes {
            if let Some(m) = by_code.get(node.code.as_str()) {
                node.name = Some(m.name.clone());
                node.leamer_class = m.leamer_class.clone();
            }
        }
    }

    /// Marks each node with one country's (or region's) specialization bit.
    pub fn apply_rca_overlay(&mut self, s: &SpecializationMatrix, country: &str) -> Result<()> {
        let c = s
            .country_index(country)
            .ok_or_else(|| Error::UnknownCountry(country.to_string()))?;
        for node in &mut self.nodes {
            node.rca = s
                .products()
                .iter()
                .position(|p| *p == node.code)
                .map(|p| s.bit(c, p));
        }
        Ok(())
    }
}

struct DisjointSet {
    parent: Vec<usize>,
    rank: Vec<u32>,
}

impl DisjointSet {
    fn new(n: usize) -> DisjointSet {
        DisjointSet {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, x: usize) -> usize {
        if self.parent[x] != x {
            self.parent[x] = self.find(self.parent[x]);
        }
        self.parent[x]
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        true
    }
}

/// Kruskal maximum spanning forest over the positive-proximity edges.
/// Weight ties are broken by lexicographic (i, j) product-code order, so the
/// result is deterministic.
pub fn max_spanning_forest(p: &ProximityMatrix) -> Result<ProductGraph> {
    let n = p.n();
    if n == 0 {
        return Err(Error::EmptyInput("proximity matrix has no products".into()));
    }
    let mut candidates: Vec<(usize, usize, f64)> = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let phi = p.get(i, j);
            if phi > 0.0 {
                candidates.push((i, j, phi));
            }
        }
    }
    // Descending weight, then code order. Products are sorted, so index order
    // is code order.
    candidates.sort_by(|a, b| {
        b.2.partial_cmp(&a.2)
            .unwrap()
            .then_with(|| (a.0, a.1).cmp(&(b.0, b.1)))
    });
    let mut ds = DisjointSet::new(n);
    let mut edges = Vec::new();
    for (i, j, phi) in candidates {
        if ds.union(i, j) {
            edges.push(GraphEdge {
                i,
                j,
                phi,
                tag: EdgeTag::Mst,
            });
        }
    }
    edges.sort_by_key(|e| (e.i, e.j));
    let nodes = p
        .products()
        .iter()
        .map(|code| GraphNode {
            code: code.clone(),
            name: None,
            leamer_class: None,
            rca: None,
        })
        .collect();
    Ok(ProductGraph { nodes, edges })
}

/// Adds every edge with `phi > threshold` (strict) not already in the forest.
pub fn overlay(g: &ProductGraph, p: &ProximityMatrix, threshold: f64) -> Result<ProductGraph> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::InvalidArgument(format!("overlay threshold {threshold} outside (0,1)")));
    }
    let n = p.n();
    let mut out = g.clone();
    let mut present: BTreeSet<(usize, usize)> = g.edges.iter().map(|e| (e.i, e.j)).collect();
    for i in 0..n {
        for j in i + 1..n {
            let phi = p.get(i, j);
            if phi > threshold && present.insert((i, j)) {
                out.edges.push(GraphEdge {
                    i,
                    j,
                    phi,
                    tag: EdgeTag::Overlay,
                });
            }
        }
    }
    out.edges.sort_by_key(|e| (e.i, e.j));
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveSample {
    pub threshold: f64,
    pub giant_size: usize,
    pub total_products: usize,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComponentCurve {
    pub samples: Vec<CurveSample>,
}

/// Largest-connected-component sweep: at each threshold t the graph keeps the
/// edges with `phi >= t`; isolated nodes count in the denominator.
pub fn component_curve(p: &ProximityMatrix, thresholds: &[f64]) -> Result<ComponentCurve> {
    if thresholds.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidArgument("thresholds must be sorted ascending".into()));
    }
    let n = p.n();
    if n == 0 {
        return Err(Error::EmptyInput("proximity matrix has no products".into()));
    }
    let mut samples = Vec::with_capacity(thresholds.len());
    for &t in thresholds {
        let mut ds = DisjointSet::new(n);
        for i in 0..n {
            for j in i + 1..n {
                if p.get(i, j) >= t {
                    ds.union(i, j);
                }
            }
        }
        let mut sizes: BTreeMap<usize, usize> = BTreeMap::new();
        for x in 0..n {
            *sizes.entry(ds.find(x)).or_insert(0) += 1;
        }
        let giant = sizes.values().copied().max().unwrap_or(0);
        samples.push(CurveSample {
            threshold: t,
            giant_size: giant,
            total_products: n,
            ratio: giant as f64 / n as f64,
        });
    }
    Ok(ComponentCurve { samples })
}

impl ComponentCurve {
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "phi_threshold,giant_size,total_products,ratio")?;
        for s in &self.samples {
            writeln!(w, "{},{},{},{}", s.threshold, s.giant_size, s.total_products, s.ratio)?;
        }
        Ok(())
    }
}

/// Agglomerative average-linkage clustering on distance 1 - phi; returns the
/// dendrogram leaf order used to display the clustered matrix. Ties merge the
/// lexicographically smallest cluster pair, so the order is deterministic.
pub fn hierarchical_order(p: &ProximityMatrix) -> Result<Vec<String>> {
    let n = p.n();
    if n == 0 {
        return Err(Error::EmptyInput("proximity matrix has no products".into()));
    }
    // Each cluster keeps its leaves in display order; the cluster label for
    // tie-breaking is its smallest member index (product lists are sorted, so
    // index order is code order).
    struct Cluster {
        leaves: Vec<usize>,
        min_leaf: usize,
        size: usize,
    }
    let mut clusters: Vec<Cluster> = (0..n)
        .map(|i| Cluster {
            leaves: vec![i],
            min_leaf: i,
            size: 1,
        })
        .collect();
    // dist[a][b] between active clusters, indexed into `clusters`.
    let mut dist: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| 1.0 - p.get(i, j)).collect())
        .collect();
    while clusters.len() > 1 {
        let mut best: Option<(usize, usize)> = None;
        for a in 0..clusters.len() {
            for b in a + 1..clusters.len() {
                // Order the candidate pair by cluster label.
                let key = if clusters[a].min_leaf < clusters[b].min_leaf {
                    (clusters[a].min_leaf, clusters[b].min_leaf)
                } else {
                    (clusters[b].min_leaf, clusters[a].min_leaf)
                };
                let better = match best {
                    None => true,
                    Some((ba, bb)) => {
                        let bkey = if clusters[ba].min_leaf < clusters[bb].min_leaf {
                            (clusters[ba].min_leaf, clusters[bb].min_leaf)
                        } else {
                            (clusters[bb].min_leaf, clusters[ba].min_leaf)
                        };
                        dist[a][b] < dist[ba][bb] || (dist[a][b] == dist[ba][bb] && key < bkey)
                    }
                };
                if better {
                    best = Some((a, b));
                }
            }
        }
        let (a, b) = best.unwrap();
        let (a, b) = (a.min(b), a.max(b));
        // Lance-Williams update for average linkage.
        let (sa, sb) = (clusters[a].size as f64, clusters[b].size as f64);
        for k in 0..clusters.len() {
            if k != a && k != b {
                let d = (sa * dist[a][k] + sb * dist[b][k]) / (sa + sb);
                dist[a][k] = d;
                dist[k][a] = d;
            }
        }
        let removed = clusters.remove(b);
        dist.remove(b);
        for row in &mut dist {
            row.remove(b);
        }
        let merged = &mut clusters[a];
        if removed.min_leaf < merged.min_leaf {
            let mut leaves = removed.leaves;
            leaves.extend_from_slice(&merged.leaves);
            merged.leaves = leaves;
            merged.min_leaf = removed.min_leaf;
        } else {
            merged.leaves.extend_from_slice(&removed.leaves);
        }
        merged.size += removed.size;
    }
    Ok(clusters[0]
        .leaves
        .iter()
        .map(|&i| p.products()[i].clone())
        .collect())
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

pub fn export_graphml<W: Write>(g: &ProductGraph, mut w: W) -> std::io::Result<()> {
    writeln!(w, r#"<?xml version="1.0" encoding="UTF-8"?>"#)?;
    writeln!(w, r#"<graphml xmlns="http://graphml.graphdrawing.org/xmlns">"#)?;
    writeln!(w, r#"  <key id="name" for="node" attr.name="name" attr.type="string"/>"#)?;
    writeln!(
        w,
        r#"  <key id="leamer_class" for="node" attr.name="leamer_class" attr.type="string"/>"#
    )?;
    writeln!(w, r#"  <key id="rca" for="node" attr.name="rca" attr.type="boolean"/>"#)?;
    writeln!(w, r#"  <key id="phi" for="edge" attr.name="phi" attr.type="double"/>"#)?;
    writeln!(w, r#"  <key id="tag" for="edge" attr.name="tag" attr.type="string"/>"#)?;
    writeln!(w, r#"  <graph id="product_space" edgedefault="undirected">"#)?;
    for node in &g.nodes {
        if node.name.is_none() && node.leamer_class.is_none() && node.rca.is_none() {
            writeln!(w, r#"    <node id="{}"/>"#, xml_escape(&node.code))?;
            continue;
        }
        writeln!(w, r#"    <node id="{}">"#, xml_escape(&node.code))?;
        if let Some(name) = &node.name {
            writeln!(w, r#"      <data key="name">{}</data>"#, xml_escape(name))?;
        }
        if let Some(class) = &node.leamer_class {
            writeln!(w, r#"      <data key="leamer_class">{}</data>"#, xml_escape(class))?;
        }
        if let Some(rca) = node.rca {
            writeln!(w, r#"      <data key="rca">{rca}</data>"#)?;
        }
        writeln!(w, r#"    </node>"#)?;
    }
    for e in &g.edges {
        writeln!(
            w,
            r#"    <edge source="{}" target="{}">"#,
            xml_escape(&g.nodes[e.i].code),
            xml_escape(&g.nodes[e.j].code)
        )?;
        writeln!(w, r#"      <data key="phi">{}</data>"#, e.phi)?;
        writeln!(w, r#"      <data key="tag">{}</data>"#, e.tag.as_str())?;
        writeln!(w, r#"    </edge>"#)?;
    }
    writeln!(w, "  </graph>")?;
    writeln!(w, "</graphml>")?;
    Ok(())
}

pub fn export_dot<W: Write>(g: &ProductGraph, mut w: W) -> std::io::Result<()> {
    writeln!(w, "graph product_space {{")?;
    for node in &g.nodes {
        match &node.name {
            Some(name) => writeln!(
                w,
                "  \"{}\" [label=\"{}\"];",
                node.code,
                name.replace('"', "\\\"")
            )?,
            None => writeln!(w, "  \"{}\";", node.code)?,
        }
    }
    for e in &g.edges {
        writeln!(
            w,
            "  \"{}\" -- \"{}\" [weight={}, tag=\"{}\"];",
            g.nodes[e.i].code,
            g.nodes[e.j].code,
            e.phi,
            e.tag.as_str()
        )?;
    }
    writeln!(w, "}}")?;
    Ok(())
}

#[derive(Serialize)]
struct JsonNode<'a> {
    id: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    name: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    class: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rca: Option<bool>,
}

#[derive(Serialize)]
struct JsonEdge<'a> {
    source: &'a str,
    target: &'a str,
    phi: f64,
    tag: &'a str,
}

#[derive(Serialize)]
struct JsonGraph<'a> {
    nodes: Vec<JsonNode<'a>>,
    edges: Vec<JsonEdge<'a>>,
}

pub fn export_json<W: Write>(g: &ProductGraph, w: W) -> Result<()> {
    let doc = JsonGraph {
        nodes: g
            .nodes
            .iter()
            .map(|n| JsonNode {
                id: &n.code,
                name: n.name.as_deref(),
                class: n.leamer_class.as_deref(),
                rca: n.rca,
            })
            .collect(),
        edges: g
            .edges
            .iter()
            .map(|e| JsonEdge {
                source: &g.nodes[e.i].code,
                target: &g.nodes[e.j].code,
                phi: e.phi,
                tag: e.tag.as_str(),
            })
            .collect(),
    };
    serde_json::to_writer_pretty(w, &doc)
        .map_err(|e| Error::InvalidArgument(format!("json export failed: {e}")))
}

pub fn export_edge_csv<W: Write>(g: &ProductGraph, mut w: W) -> std::io::Result<()> {
    writeln!(w, "sitc4_i,sitc4_j,phi,tag")?;
    for e in &g.edges {
        writeln!(
            w,
            "{},{},{},{}",
            g.nodes[e.i].code,
            g.nodes[e.j].code,
            e.phi,
            e.tag.as_str()
        )?;
    }
    Ok(())
}

/// Rebuilds a graph from an edge CSV. Nodes are the codes appearing in the
/// edges; isolated nodes are not representable in this format.
pub fn read_edge_csv<R: Read>(r: R) -> Result<ProductGraph> {
    let mut rdr = csv::Reader::from_reader(r);
    let headers = rdr.headers().map_err(|e| Error::parse("edges", 0, e.to_string()))?;
    if headers.iter().collect::<Vec<_>>() != ["sitc4_i", "sitc4_j", "phi", "tag"] {
        return Err(Error::parse("edges", 1, "expected header 'sitc4_i,sitc4_j,phi,tag'"));
    }
    let mut raw = Vec::new();
    let mut codes = BTreeSet::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::parse("edges", 0, e.to_string()))?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let phi: f64 = rec[2]
            .parse()
            .map_err(|_| Error::parse("edges", line, format!("bad phi '{}'", &rec[2])))?;
        let tag: EdgeTag = rec[3].parse()?;
        codes.insert(rec[0].to_string());
        codes.insert(rec[1].to_string());
        raw.push((rec[0].to_string(), rec[1].to_string(), phi, tag));
    }
    let nodes: Vec<GraphNode> = codes
        .into_iter()
        .map(|code| GraphNode {
            code,
            name: None,
            leamer_class: None,
            rca: None,
        })
        .collect();
    let index: BTreeMap<&str, usize> = nodes
        .iter()
        .enumerate()
        .map(|(i, n)| (n.code.as_str(), i))
        .collect();
    let mut edges: Vec<GraphEdge> = raw
        .into_iter()
        .map(|(a, b, phi, tag)| {
            let (i, j) = (index[a.as_str()], index[b.as_str()]);
            GraphEdge {
                i: i.min(j),
                j: i.max(j),
                phi,
                tag,
            }
        })
        .collect();
    edges.sort_by_key(|e| (e.i, e.j));
    Ok(ProductGraph { nodes, edges })
}
