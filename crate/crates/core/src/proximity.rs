//! Product-proximity matrix from co-specialization.
//!
//! For products i and j with specialized-country sets S_i and S_j the
//! proximity is the minimum of the two conditional probabilities
//! P(i|j) = |S_i n S_j| / |S_j| and P(j|i), which reduces to
//! |S_i n S_j| / max(|S_i|, |S_j|). Products nobody is specialized in get
//! proximity 0 to everything.

use std::collections::BTreeSet;
use std::io::{Read, Write};

use serde::Serialize;

use crate::specialization::SpecializationMatrix;
use crate::stats;
use crate::{Error, Result};

/// Symmetric product x product matrix of proximities in [0, 1]; the diagonal
/// is unused and stored as 0.
#[derive(Debug, Clone, PartialEq)]
pub struct ProximityMatrix {
    products: Vec<String>,
    phi: Vec<f64>,
}

impl ProximityMatrix {
    /// Builds from a row-major dense buffer, validating symmetry, range and a
    /// zero diagonal.
    pub fn from_dense(products: Vec<String>, phi: Vec<f64>) -> Result<Self> {
        let n = products.len();
        if phi.len() != n * n {
            return Err(Error::InvalidArgument("phi buffer shape mismatch".into()));
        }
        for i in 0..n {
            if phi[i * n + i] != 0.0 {
                return Err(Error::InvalidArgument("phi diagonal must be zero".into()));
            }
            for j in 0..n {
                let v = phi[i * n + j];
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::InvalidArgument(format!("phi value {v} outside [0,1]")));
                }
                if phi[i * n + j] != phi[j * n + i] {
                    return Err(Error::InvalidArgument("phi must be symmetric".into()));
                }
            }
        }
        Ok(ProximityMatrix { products, phi })
    }

    pub fn n(&self) -> usize {
        self.products.len()
    }

    pub fn products(&self) -> &[String] {
        &self.products
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.phi[i * self.products.len() + j]
    }

    pub fn product_index(&self, code: &str) -> Option<usize> {
        self.products.iter().position(|p| p == code)
    }

    /// Long-form CSV `sitc4_i,sitc4_j,phi` over all unordered pairs with
    /// i < j lexicographically.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "sitc4_i,sitc4_j,phi")?;
        let n = self.n();
        for i in 0..n {
            for j in i + 1..n {
                let (a, b) = if self.products[i] <= self.products[j] {
                    (i, j)
                } else {
                    (j, i)
                };
                writeln!(w, "{},{},{}", self.products[a], self.products[b], self.get(i, j))?;
            }
        }
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<ProximityMatrix> {
        let mut rdr = csv::Reader::from_reader(r);
        let headers = rdr.headers().map_err(|e| Error::parse("proximity", 0, e.to_string()))?;
        if headers.iter().collect::<Vec<_>>() != ["sitc4_i", "sitc4_j", "phi"] {
            return Err(Error::parse("proximity", 1, "expected header 'sitc4_i,sitc4_j,phi'"));
        }
        let mut pairs = Vec::new();
        let mut codes = BTreeSet::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| Error::parse("proximity", 0, e.to_string()))?;
            let line = rec.position().map(|p| p.line()).unwrap_or(0);
            let v: f64 = rec[2]
                .parse()
                .map_err(|_| Error::parse("proximity", line, format!("bad phi '{}'", &rec[2])))?;
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::parse("proximity", line, format!("phi {v} outside [0,1]")));
            }
            codes.insert(rec[0].to_string());
            codes.insert(rec[1].to_string());
            pairs.push((rec[0].to_string(), rec[1].to_string(), v));
        }
        if pairs.is_empty() {
            return Err(Error::EmptyInput("proximity CSV has no rows".into()));
        }
        let products: Vec<String> = codes.into_iter().collect();
        let n = products.len();
        let mut phi = vec![0.0; n * n];
        for (a, b, v) in pairs {
            let i = products.binary_search(&a).unwrap();
            let j = products.binary_search(&b).unwrap();
            if i == j {
                return Err(Error::InvalidArgument(format!("self-pair {a}")));
            }
            phi[i * n + j] = v;
            phi[j * n + i] = v;
        }
        ProximityMatrix::from_dense(products, phi)
    }

    /// Dense binary export: row-major little-endian f64 plus a JSON sidecar
    /// listing the product codes.
    pub fn write_dense<W: Write, S: Write>(&self, mut data: W, mut sidecar: S) -> Result<()> {
        for v in &self.phi {
            data.write_all(&v.to_le_bytes()).map_err(|e| Error::Io {
                path: "<dense>".into(),
                source: e,
            })?;
        }
        serde_json::to_writer(&mut sidecar, &self.products).map_err(|e| {
            Error::InvalidArgument(format!("sidecar serialization failed: {e}"))
        })?;
        Ok(())
    }

    pub fn read_dense<R: Read, S: Read>(mut data: R, sidecar: S) -> Result<ProximityMatrix> {
        let products: Vec<String> = serde_json::from_reader(sidecar)
            .map_err(|e| Error::InvalidArgument(format!("bad sidecar: {e}")))?;
        let n = products.len();
        let mut phi = vec![0.0; n * n];
        let mut buf = [0u8; 8];
        for v in &mut phi {
            data.read_exact(&mut buf).map_err(|e| Error::Io {
                path: "<dense>".into(),
                source: e,
            })?;
            *v = f64::from_le_bytes(buf);
        }
        ProximityMatrix::from_dense(products, phi)
    }
}

/// Computes the proximity matrix from a specialization matrix.
pub fn proximity(s: &SpecializationMatrix) -> Result<ProximityMatrix> {
    let np = s.products().len();
    let nc = s.countries().len();
    if np == 0 {
        return Err(Error::EmptyInput("specialization matrix has no products".into()));
    }
    // Per-product country bitsets; pair intersections are popcounts.
    let words = nc.div_ceil(64);
    let mut sets = vec![0u64; np * words];
    let mut sizes = vec![0u32; np];
    for p in 0..np {
        for c in 0..nc {
            if s.bit(c, p) {
                sets[p * words + c / 64] |= 1u64 << (c % 64);
                sizes[p] += 1;
            }
        }
    }
    let mut phi = vec![0.0; np * np];
    for i in 0..np {
        if sizes[i] == 0 {
            continue;
        }
        for j in i + 1..np {
            if sizes[j] == 0 {
                continue;
            }
            let inter: u32 = (0..words)
                .map(|w| (sets[i * words + w] & sets[j * words + w]).count_ones())
                .sum();
            let v = inter as f64 / sizes[i].max(sizes[j]) as f64;
            phi[i * np + j] = v;
            phi[j * np + i] = v;
        }
    }
    ProximityMatrix::from_dense(s.products().to_vec(), phi)
}

/// Distribution statistics over the off-diagonal unordered pairs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhiStats {
    pub pairs: u64,
    pub frac_zero: f64,
    /// (threshold, fraction of pairs with phi strictly below it).
    pub frac_below: Vec<(f64, f64)>,
    /// 50 equal-width bin counts over [0, 1].
    pub histogram: Vec<u64>,
}

pub const PHI_HISTOGRAM_BINS: usize = 50;

pub fn phi_stats(p: &ProximityMatrix, thresholds: &[f64]) -> Result<PhiStats> {
    if p.n() < 2 {
        return Err(Error::EmptyInput("need at least 2 products for phi statistics".into()));
    }
    for t in thresholds {
        if !(*t > 0.0 && *t <= 1.0) {
            return Err(Error::InvalidArgument(format!("threshold {t} outside (0,1]")));
        }
    }
    let n = p.n();
    let pairs = (n * (n - 1) / 2) as u64;
    let mut zero = 0u64;
    let mut below = vec![0u64; thresholds.len()];
    let mut hist = vec![0u64; PHI_HISTOGRAM_BINS];
    for i in 0..n {
        for j in i + 1..n {
            let v = p.get(i, j);
            if v == 0.0 {
                zero += 1;
            }
            for (k, t) in thresholds.iter().enumerate() {
                if v < *t {
                    below[k] += 1;
                }
            }
            let bin = ((v * PHI_HISTOGRAM_BINS as f64) as usize).min(PHI_HISTOGRAM_BINS - 1);
            hist[bin] += 1;
        }
    }
    Ok(PhiStats {
        pairs,
        frac_zero: zero as f64 / pairs as f64,
        frac_below: thresholds
            .iter()
            .zip(below)
            .map(|(t, c)| (*t, c as f64 / pairs as f64))
            .collect(),
        histogram: hist,
    })
}

/// Pearson correlation between two proximity matrices over a pair selection
/// (default: all off-diagonal pairs of the shared product universe).
pub fn phi_correlation(
    p1: &ProximityMatrix,
    p2: &ProximityMatrix,
    edge_set: Option<&[(String, String)]>,
) -> Result<f64> {
    let shared: Vec<&String> = p1
        .products()
        .iter()
        .filter(|c| p2.product_index(c).is_some())
        .collect();
    if shared.len() < p1.n() || shared.len() < p2.n() {
        log::warn!(
            "proximity matrices differ in universe; correlating over the {} shared products",
            shared.len()
        );
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    match edge_set {
        Some(pairs) => {
            for (a, b) in pairs {
                match (
                    p1.product_index(a),
                    p1.product_index(b),
                    p2.product_index(a),
                    p2.product_index(b),
                ) {
                    (Some(i1), Some(j1), Some(i2), Some(j2)) => {
                        xs.push(p1.get(i1, j1));
                        ys.push(p2.get(i2, j2));
                    }
                    _ => log::warn!("edge ({a}, {b}) outside the shared universe, skipped"),
                }
            }
        }
        None => {
            for (a_pos, a) in shared.iter().enumerate() {
                for b in &shared[a_pos + 1..] {
                    let (i1, j1) = (p1.product_index(a).unwrap(), p1.product_index(b).unwrap());
                    let (i2, j2) = (p2.product_index(a).unwrap(), p2.product_index(b).unwrap());
                    xs.push(p1.get(i1, j1));
                    ys.push(p2.get(i2, j2));
                }
            }
        }
    }
    if xs.len() < 2 {
        return Err(Error::UndefinedCorrelation(format!("only {} pairs selected", xs.len())));
    }
    stats::pearson(&xs, &ys)
        .ok_or_else(|| Error::UndefinedCorrelation("zero variance in selected pairs".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specialization::SpecializationMatrix;

    fn spec(countries: &[&str], products: &[&str], bits: &[u8]) -> SpecializationMatrix {
        SpecializationMatrix::new(
            countries.iter().map(|s| s.to_string()).collect(),
            products.iter().map(|s| s.to_string()).collect(),
            bits.iter().map(|b| *b != 0).collect(),
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn identical_supports_give_phi_one() {
        let s = spec(&["AAA", "BBB"], &["0001", "0002"], &[1, 1, 1, 1]);
        let p = proximity(&s).unwrap();
        assert_eq!(p.get(0, 1), 1.0);
    }

    #[test]
    fn half_overlap_gives_half() {
        // S_1 = {A, B}, S_2 = {B, C}
        let s = spec(&["AAA", "BBB", "CCC"], &["0001", "0002"], &[1, 0, 1, 1, 0, 1]);
        let p = proximity(&s).unwrap();
        assert_eq!(p.get(0, 1), 0.5);
    }

    #[test]
    fn disjoint_supports_give_zero() {
        let s = spec(&["AAA", "BBB"], &["0001", "0002"], &[1, 0, 0, 1]);
        let p = proximity(&s).unwrap();
        assert_eq!(p.get(0, 1), 0.0);
    }

    #[test]
    fn empty_support_is_isolated() {
        let s = spec(&["AAA"], &["0001", "0002"], &[1, 0]);
        let p = proximity(&s).unwrap();
        assert_eq!(p.get(0, 1), 0.0);
    }

    #[test]
    fn stats_counts_strictly() {
        let phi = vec![
            0.0, 0.0, 0.15, //
            0.0, 0.0, 0.5, //
            0.15, 0.5, 0.0,
        ];
        let p = ProximityMatrix::from_dense(
            vec!["0001".into(), "0002".into(), "0003".into()],
            phi,
        )
        .unwrap();
        let st = phi_stats(&p, &[0.2]).unwrap();
        assert_eq!(st.pairs, 3);
        assert!((st.frac_zero - 1.0 / 3.0).abs() < 1e-12);
        assert!((st.frac_below[0].1 - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn all_zero_stats() {
        let p = ProximityMatrix::from_dense(
            vec!["0001".into(), "0002".into()],
            vec![0.0; 4],
        )
        .unwrap();
        let st = phi_stats(&p, &[0.1]).unwrap();
        assert_eq!(st.frac_zero, 1.0);
    }

    #[test]
    fn correlation_self_is_one() {
        let p = ProximityMatrix::from_dense(
            vec!["0001".into(), "0002".into(), "0003".into()],
            vec![
                0.0, 0.2, 0.7, //
                0.2, 0.0, 0.4, //
                0.7, 0.4, 0.0,
            ],
        )
        .unwrap();
        let r = phi_correlation(&p, &p, None).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
    }

    #[test]
    fn correlation_affine_is_one() {
        let n = 3;
        let base = vec![
            0.0, 0.2, 0.4, //
            0.2, 0.0, 0.6, //
            0.4, 0.6, 0.0,
        ];
        let shifted: Vec<f64> = base
            .iter()
            .enumerate()
            .map(|(k, v)| if k / n == k % n { 0.0 } else { 0.5 * v + 0.1 })
            .collect();
        let codes: Vec<String> = vec!["0001".into(), "0002".into(), "0003".into()];
        let p1 = ProximityMatrix::from_dense(codes.clone(), base).unwrap();
        let p2 = ProximityMatrix::from_dense(codes, shifted).unwrap();
        let r = phi_correlation(&p1, &p2, None).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
    }

    #[test]
    fn correlation_needs_two_pairs() {
        let p = ProximityMatrix::from_dense(vec!["0001".into(), "0002".into()], vec![0.0, 0.3, 0.3, 0.0]).unwrap();
        assert!(matches!(
            phi_correlation(&p, &p, None),
            Err(Error::UndefinedCorrelation(_))
        ));
    }

    #[test]
    fn csv_round_trip() {
        let s = spec(&["AAA", "BBB", "CCC"], &["0001", "0002", "0003"], &[1, 0, 1, 1, 1, 0, 0, 1, 1]);
        let p = proximity(&s).unwrap();
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        let back = ProximityMatrix::read_csv(&buf[..]).unwrap();
        assert_eq!(p, back);
    }

    #[test]
    fn dense_round_trip() {
        let s = spec(&["AAA", "BBB", "CCC"], &["0001", "0002", "0003"], &[1, 0, 1, 1, 1, 0, 0, 1, 1]);
        let p = proximity(&s).unwrap();
        let mut data = Vec::new();
        let mut side = Vec::new();
        p.write_dense(&mut data, &mut side).unwrap();
        let back = ProximityMatrix::read_dense(&data[..], &side[..]).unwrap();
        assert_eq!(p, back);
    }
}
