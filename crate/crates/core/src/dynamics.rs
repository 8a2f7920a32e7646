//! Specialization dynamics on a fixed product space: density around
//! products, transition classification between two RCA snapshots, the
//! per-product discovery ratio and transition-probability curves.

use std::collections::BTreeSet;
use std::io::Write;

use crate::proximity::ProximityMatrix;
use crate::specialization::{RcaMatrix, SpecializationMatrix};
use crate::stats::Histogram;
use crate::{Error, Result};

/// Density row for one country: the proximity-weighted fraction of each
/// product's neighborhood the country has already developed.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityRow {
    pub country: String,
    /// Aligned with the proximity matrix product order.
    pub values: Vec<f64>,
}

/// Density rows for every country, sharing one product order.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityTable {
    pub products: Vec<String>,
    pub rows: Vec<DensityRow>,
}

impl DensityTable {
    pub fn get(&self, country: &str, product: &str) -> Option<f64> {
        let row = self.rows.iter().find(|r| r.country == country)?;
        let p = self.products.iter().position(|c| c == product)?;
        Some(row.values[p])
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "country,sitc4,omega")?;
        for row in &self.rows {
            for (p, product) in self.products.iter().enumerate() {
                writeln!(w, "{},{},{}", row.country, product, row.values[p])?;
            }
        }
        Ok(())
    }
}

fn check_universe(s: &SpecializationMatrix, p: &ProximityMatrix) -> Result<()> {
    if s.products() != p.products() {
        return Err(Error::UniverseMismatch(
            "specialization and proximity matrices list different products".into(),
        ));
    }
    Ok(())
}

/// Density around every product for one country. The diagonal is excluded
/// from both sums; fully isolated products get density 0.
pub fn density(s: &SpecializationMatrix, p: &ProximityMatrix, country: &str) -> Result<DensityRow> {
    check_universe(s, p)?;
    let c = s
        .country_index(country)
        .ok_or_else(|| Error::UnknownCountry(country.to_string()))?;
    Ok(density_for_index(s, p, c))
}

fn density_for_index(s: &SpecializationMatrix, p: &ProximityMatrix, c: usize) -> DensityRow {
    let n = p.n();
    let bits = s.country_bits(c);
    let mut values = vec![0.0; n];
    for j in 0..n {
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..n {
            if i == j {
                continue;
            }
            let phi = p.get(i, j);
            den += phi;
            if bits[i] {
                num += phi;
            }
        }
        values[j] = if den > 0.0 { num / den } else { 0.0 };
    }
    DensityRow {
        country: s.countries()[c].clone(),
        values,
    }
}

/// Density rows for every country in the specialization matrix.
pub fn density_all(s: &SpecializationMatrix, p: &ProximityMatrix) -> Result<DensityTable> {
    check_universe(s, p)?;
    let rows = (0..s.countries().len())
        .map(|c| density_for_index(s, p, c))
        .collect();
    Ok(DensityTable {
        products: p.products().to_vec(),
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransitionLabel {
    Transition,
    Undeveloped,
    Inconclusive,
}

impl TransitionLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            TransitionLabel::Transition => "transition",
            TransitionLabel::Undeveloped => "undeveloped",
            TransitionLabel::Inconclusive => "inconclusive",
        }
    }
}

/// Classification of every (country, product) pair that started below the
/// low-RCA cutoff at the first snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionTable {
    pub countries: Vec<String>,
    pub products: Vec<String>,
    /// (country index, product index, label), indices into the lists above.
    pub entries: Vec<(usize, usize, TransitionLabel)>,
    pub low: f64,
    pub high: f64,
}

impl TransitionTable {
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "country,sitc4,label")?;
        for (c, p, label) in &self.entries {
            writeln!(w, "{},{},{}", self.countries[*c], self.products[*p], label.as_str())?;
        }
        Ok(())
    }
}

/// Classifies candidate pairs (RCA_t0 < low) by their RCA at the second
/// snapshot: transition above `high`, undeveloped below `low`, inconclusive
/// in between or exactly on a boundary.
pub fn classify_transitions(
    r0: &RcaMatrix,
    r1: &RcaMatrix,
    low: f64,
    high: f64,
) -> Result<TransitionTable> {
    if !(low < high) {
        return Err(Error::InvalidArgument(format!("low {low} must be below high {high}")));
    }
    let countries: Vec<String> = {
        let set1: BTreeSet<&String> = r1.countries().iter().collect();
        r0.countries().iter().filter(|c| set1.contains(c)).cloned().collect()
    };
    let products: Vec<String> = {
        let set1: BTreeSet<&String> = r1.products().iter().collect();
        r0.products().iter().filter(|p| set1.contains(p)).cloned().collect()
    };
    if countries.is_empty() || products.is_empty() {
        return Err(Error::UniverseMismatch(
            "the two RCA snapshots share no countries or no products".into(),
        ));
    }
    if countries.len() < r0.countries().len().max(r1.countries().len())
        || products.len() < r0.products().len().max(r1.products().len())
    {
        log::warn!(
            "snapshots differ in universe; classifying over the {}x{} intersection",
            countries.len(),
            products.len()
        );
    }
    let mut entries = Vec::new();
    for (ci, country) in countries.iter().enumerate() {
        let c0 = r0.country_index(country).unwrap();
        let c1 = r1.country_index(country).unwrap();
        for (pi, product) in products.iter().enumerate() {
            let p0 = r0.products().iter().position(|p| p == product).unwrap();
            let p1 = r1.products().iter().position(|p| p == product).unwrap();
            let v0 = r0.value(c0, p0);
            if v0 >= low {
                continue;
            }
            let v1 = r1.value(c1, p1);
            let label = if v1 > high {
                TransitionLabel::Transition
            } else if v1 < low {
                TransitionLabel::Undeveloped
            } else {
                TransitionLabel::Inconclusive
            };
            entries.push((ci, pi, label));
        }
    }
    Ok(TransitionTable {
        countries,
        products,
        entries,
        low,
        high,
    })
}

/// Density histograms for transition vs undeveloped pairs over shared bins.
pub fn density_distributions(
    t: &TransitionTable,
    densities: &DensityTable,
    bin_width: f64,
) -> Result<(Histogram, Histogram)> {
    let mut transition = Histogram::new(bin_width);
    let mut undeveloped = Histogram::new(bin_width);
    for (c, p, label) in &t.entries {
        let hist = match label {
            TransitionLabel::Transition => &mut transition,
            TransitionLabel::Undeveloped => &mut undeveloped,
            TransitionLabel::Inconclusive => continue,
        };
        let omega = densities
            .get(&t.countries[*c], &t.products[*p])
            .ok_or_else(|| {
                Error::UniverseMismatch(format!(
                    "no density for ({}, {})",
                    t.countries[*c], t.products[*p]
                ))
            })?;
        hist.add(omega);
    }
    Ok((transition, undeveloped))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProductRatio {
    pub product: String,
    pub transitions: usize,
    pub undeveloped: usize,
    /// Mean density in transitioning countries over mean density in
    /// countries that stayed undeveloped; `None` when either side is empty
    /// or the undeveloped mean is zero.
    pub h: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransitionStats {
    pub rows: Vec<ProductRatio>,
    /// Fraction of defined ratios exceeding 1.
    pub frac_above_one: Option<f64>,
}

impl TransitionStats {
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "sitc4,T,nonT,H")?;
        for r in &self.rows {
            match r.h {
                Some(h) => writeln!(w, "{},{},{},{}", r.product, r.transitions, r.undeveloped, h)?,
                None => writeln!(w, "{},{},{},", r.product, r.transitions, r.undeveloped)?,
            }
        }
        Ok(())
    }
}

/// Per-product discovery ratio H: how much denser the neighborhood was in
/// countries that transitioned into the product than in those that did not.
pub fn discovery_ratio(t: &TransitionTable, densities: &DensityTable) -> Result<TransitionStats> {
    let mut rows = Vec::new();
    let mut defined = 0usize;
    let mut above = 0usize;
    for (pi, product) in t.products.iter().enumerate() {
        let mut tr = Vec::new();
        let mut un = Vec::new();
        for (c, p, label) in &t.entries {
            if *p != pi {
                continue;
            }
            let omega = densities
                .get(&t.countries[*c], product)
                .ok_or_else(|| {
                    Error::UniverseMismatch(format!("no density for ({}, {})", t.countries[*c], product))
                })?;
            match label {
                TransitionLabel::Transition => tr.push(omega),
                TransitionLabel::Undeveloped => un.push(omega),
                TransitionLabel::Inconclusive => {}
            }
        }
        let h = if tr.is_empty() || un.is_empty() {
            None
        } else {
            let mt = tr.iter().sum::<f64>() / tr.len() as f64;
            let mu = un.iter().sum::<f64>() / un.len() as f64;
            (mu > 0.0).then(|| mt / mu)
        };
        if let Some(h) = h {
            defined += 1;
            if h > 1.0 {
                above += 1;
            }
        }
        rows.push(ProductRatio {
            product: product.clone(),
            transitions: tr.len(),
            undeveloped: un.len(),
            h,
        });
    }
    Ok(TransitionStats {
        rows,
        frac_above_one: (defined > 0).then(|| above as f64 / defined as f64),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbBin {
    pub low: f64,
    pub high: f64,
    pub transitions: u64,
    pub opportunities: u64,
    pub probability: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityCurve {
    pub bins: Vec<ProbBin>,
}

impl ProbabilityCurve {
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "bin_low,bin_high,transitions,opportunities,probability")?;
        for b in &self.bins {
            match b.probability {
                Some(p) => writeln!(w, "{},{},{},{},{}", b.low, b.high, b.transitions, b.opportunities, p)?,
                None => writeln!(w, "{},{},{},{},", b.low, b.high, b.transitions, b.opportunities)?,
            }
        }
        Ok(())
    }
}

/// Nearest developed neighbor of product `j` for the country at index `c`:
/// the maximum proximity from `j` to any product the country is specialized
/// in. Empty baskets give 0.
fn nearest_developed_phi(s: &SpecializationMatrix, p: &ProximityMatrix, c: usize, j: usize) -> f64 {
    let bits = s.country_bits(c);
    let mut best = 0.0f64;
    for i in 0..p.n() {
        if i != j && bits[i] {
            best = best.max(p.get(i, j));
        }
    }
    best
}

/// Transition probability as a function of the proximity of the nearest
/// developed product. Inconclusive pairs are excluded from both numerator
/// and denominator; countries with empty baskets land in the lowest bin
/// unless `include_empty_basket` is false.
pub fn transition_prob_by_proximity(
    t: &TransitionTable,
    s0: &SpecializationMatrix,
    p: &ProximityMatrix,
    bin_width: f64,
    include_empty_basket: bool,
) -> Result<ProbabilityCurve> {
    check_universe(s0, p)?;
    if !(bin_width > 0.0 && bin_width <= 1.0) {
        return Err(Error::InvalidArgument(format!("bin width {bin_width} outside (0,1]")));
    }
    let nbins = (1.0 / bin_width).ceil() as usize;
    let mut transitions = vec![0u64; nbins];
    let mut opportunities = vec![0u64; nbins];
    for (c, pi, label) in &t.entries {
        if *label == TransitionLabel::Inconclusive {
            continue;
        }
        let country = &t.countries[*c];
        let sc = s0
            .country_index(country)
            .ok_or_else(|| Error::UnknownCountry(country.clone()))?;
        let j = p
            .product_index(&t.products[*pi])
            .ok_or_else(|| Error::UniverseMismatch(format!("product {} not in proximity matrix", t.products[*pi])))?;
        if !include_empty_basket && s0.country_bits(sc).iter().all(|b| !b) {
            continue;
        }
        let phi_star = nearest_developed_phi(s0, p, sc, j);
        let bin = ((phi_star / bin_width) as usize).min(nbins - 1);
        opportunities[bin] += 1;
        if *label == TransitionLabel::Transition {
            transitions[bin] += 1;
        }
    }
    let bins = (0..nbins)
        .map(|b| ProbBin {
            low: b as f64 * bin_width,
            high: ((b + 1) as f64 * bin_width).min(1.0),
            transitions: transitions[b],
            opportunities: opportunities[b],
            probability: (opportunities[b] > 0).then(|| transitions[b] as f64 / opportunities[b] as f64),
        })
        .collect();
    Ok(ProbabilityCurve { bins })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankBin {
    pub rank: usize,
    pub transitions: u64,
    pub opportunities: u64,
    pub probability: Option<f64>,
}

/// Transition probability by the rank of the nearest developed neighbor in
/// product `j`'s proximity ordering (rank 1 = j's closest neighbor overall
/// is developed). Proximity ties share the minimum rank; pairs whose country
/// has an empty basket carry no rank and are excluded.
pub fn transition_prob_by_rank(
    t: &TransitionTable,
    s0: &SpecializationMatrix,
    p: &ProximityMatrix,
) -> Result<Vec<RankBin>> {
    check_universe(s0, p)?;
    let n = p.n();
    let mut transitions: Vec<u64> = Vec::new();
    let mut opportunities: Vec<u64> = Vec::new();
    for (c, pi, label) in &t.entries {
        if *label == TransitionLabel::Inconclusive {
            continue;
        }
        let country = &t.countries[*c];
        let sc = s0
            .country_index(country)
            .ok_or_else(|| Error::UnknownCountry(country.clone()))?;
        let j = p
            .product_index(&t.products[*pi])
            .ok_or_else(|| Error::UniverseMismatch(format!("product {} not in proximity matrix", t.products[*pi])))?;
        let bits = s0.country_bits(sc);
        // Rank of developed neighbor i: 1 + count of neighbors strictly
        // closer to j. The minimum over developed neighbors is the rank of
        // the nearest one, with ties collapsing onto the same rank.
        let mut best_rank: Option<usize> = None;
        for i in 0..n {
            if i == j || !bits[i] {
                continue;
            }
            let phi_i = p.get(i, j);
            let rank = 1 + (0..n)
                .filter(|&k| k != j && p.get(k, j) > phi_i)
                .count();
            best_rank = Some(best_rank.map_or(rank, |r| r.min(rank)));
        }
        let Some(rank) = best_rank else { continue };
        if rank > transitions.len() {
            transitions.resize(rank, 0);
            opportunities.resize(rank, 0);
        }
        opportunities[rank - 1] += 1;
        if *label == TransitionLabel::Transition {
            transitions[rank - 1] += 1;
        }
    }
    Ok((0..transitions.len())
        .map(|r| RankBin {
            rank: r + 1,
            transitions: transitions[r],
            opportunities: opportunities[r],
            probability: (opportunities[r] > 0).then(|| transitions[r] as f64 / opportunities[r] as f64),
        })
        .collect())
}

pub fn write_rank_csv<W: Write>(bins: &[RankBin], mut w: W) -> std::io::Result<()> {
    writeln!(w, "rank,transitions,opportunities,probability")?;
    for b in bins {
        match b.probability {
            Some(p) => writeln!(w, "{},{},{},{}", b.rank, b.transitions, b.opportunities, p)?,
            None => writeln!(w, "{},{},{},", b.rank, b.transitions, b.opportunities)?,
        }
    }
    Ok(())
}
