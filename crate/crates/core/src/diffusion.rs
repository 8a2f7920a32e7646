//! Threshold diffusion of comparative advantage over the product space and
//! PRODY-based convergence summaries.

use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;

use crate::ingest::CountryIncome;
use crate::proximity::ProximityMatrix;
use crate::specialization::{RcaMatrix, SpecializationMatrix};
use crate::stats;
use crate::{Error, Result};

/// Diffusion parameters. Defaults: 20 rounds, top-50 PRODY average,
/// inclusive threshold comparison (acquire when phi >= phi0).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffusionConfig {
    pub phi0: f64,
    pub iterations: u32,
    pub top_n: usize,
    pub inclusive: bool,
}

impl DiffusionConfig {
    pub fn new(phi0: f64) -> Result<DiffusionConfig> {
        if !(phi0 > 0.0 && phi0 <= 1.0) {
            return Err(Error::InvalidArgument(format!("phi0 {phi0} outside (0,1]")));
        }
        Ok(DiffusionConfig {
            phi0,
            iterations: 20,
            top_n: 50,
            inclusive: true,
        })
    }

    fn reaches(&self, phi: f64) -> bool {
        if self.inclusive {
            phi >= self.phi0
        } else {
            phi > self.phi0
        }
    }
}

/// Products a country acquires under threshold diffusion, keyed by product
/// code; step 0 is the initial specialization basket, step k >= 1 the first
/// round the product became reachable. Unreached products are absent.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffusionTrace {
    pub country: String,
    pub acquired: BTreeMap<String, u32>,
}

impl DiffusionTrace {
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "country,sitc4,step")?;
        for (product, step) in &self.acquired {
            writeln!(w, "{},{},{}", self.country, product, step)?;
        }
        Ok(())
    }
}

/// Appends one trace's rows without the header; used when writing all
/// countries into a single file.
pub fn write_trace_rows<W: Write>(trace: &DiffusionTrace, mut w: W) -> std::io::Result<()> {
    for (product, step) in &trace.acquired {
        writeln!(w, "{},{},{}", trace.country, product, step)?;
    }
    Ok(())
}

/// Frontier expansion: at each round every unacquired product whose best
/// proximity to the acquired set clears phi0 joins the basket. Stops early at
/// a fixed point; growth is monotone so the result is unchanged.
pub fn diffuse(
    s: &SpecializationMatrix,
    p: &ProximityMatrix,
    cfg: &DiffusionConfig,
    country: &str,
) -> Result<DiffusionTrace> {
    if s.products() != p.products() {
        return Err(Error::UniverseMismatch(
            "specialization and proximity matrices list different products".into(),
        ));
    }
    let c = s
        .country_index(country)
        .ok_or_else(|| Error::UnknownCountry(country.to_string()))?;
    let n = p.n();
    let mut step: Vec<Option<u32>> = s.country_bits(c).iter().map(|&b| b.then_some(0)).collect();
    for round in 1..=cfg.iterations {
        let mut added = Vec::new();
        for j in 0..n {
            if step[j].is_some() {
                continue;
            }
            let reachable = (0..n).any(|i| step[i].is_some() && i != j && cfg.reaches(p.get(i, j)));
            if reachable {
                added.push(j);
            }
        }
        if added.is_empty() {
            break;
        }
        for j in added {
            step[j] = Some(round);
        }
    }
    let acquired = step
        .iter()
        .enumerate()
        .filter_map(|(j, st)| st.map(|k| (p.products()[j].clone(), k)))
        .collect();
    Ok(DiffusionTrace {
        country: country.to_string(),
        acquired,
    })
}

/// Income level of a product: RCA-weighted average GDP per capita of its
/// exporters.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductIncome {
    pub product: String,
    pub prody: f64,
}

/// PRODY for every product with at least one positive-RCA exporter that has
/// income data; products without one are omitted with a warning.
pub fn prody(r: &RcaMatrix, incomes: &[CountryIncome]) -> Result<Vec<ProductIncome>> {
    if incomes.is_empty() {
        return Err(Error::EmptyInput("no income data".into()));
    }
    let income_by_country: BTreeMap<&str, f64> = incomes
        .iter()
        .map(|i| (i.country.as_str(), i.gdp_per_capita))
        .collect();
    let mut out = Vec::new();
    for (pi, product) in r.products().iter().enumerate() {
        let mut num = 0.0;
        let mut den = 0.0;
        for (ci, country) in r.countries().iter().enumerate() {
            if let Some(gdp) = income_by_country.get(country.as_str()) {
                let rca = r.value(ci, pi);
                num += rca * gdp;
                den += rca;
            }
        }
        if den > 0.0 {
            out.push(ProductIncome {
                product: product.clone(),
                prody: num / den,
            });
        } else {
            log::warn!("product {product} has no positive-RCA exporter with income data; PRODY omitted");
        }
    }
    Ok(out)
}

/// Average PRODY of the `top_n` highest-PRODY products in the reached set
/// (initial basket included); `None` when no reached product has a PRODY.
pub fn reach_prody(trace: &DiffusionTrace, prodys: &[ProductIncome], top_n: usize) -> Option<f64> {
    let by_product: BTreeMap<&str, f64> = prodys.iter().map(|p| (p.product.as_str(), p.prody)).collect();
    let mut reached: Vec<f64> = trace
        .acquired
        .keys()
        .filter_map(|code| by_product.get(code.as_str()).copied())
        .collect();
    if reached.is_empty() {
        return None;
    }
    reached.sort_by(|a, b| b.partial_cmp(a).unwrap());
    reached.truncate(top_n.max(1));
    Some(reached.iter().sum::<f64>() / reached.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub phi0: f64,
    pub iqr: f64,
    pub ratio: f64,
}

/// Per-phi0 distribution of post-diffusion reach PRODY and its IQR
/// normalized by the no-diffusion IQR.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub original_iqr: f64,
    pub rows: Vec<SweepRow>,
    /// (phi0, country, reach PRODY); phi0 = None marks the original
    /// no-diffusion distribution.
    #[serde(skip)]
    pub samples: Vec<(Option<f64>, String, Option<f64>)>,
}

impl ConvergenceReport {
    pub fn write_sweep_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "phi0,country,reach_prody")?;
        for (phi0, country, reach) in &self.samples {
            let phi_txt = phi0.map(|v| v.to_string()).unwrap_or_else(|| "original".into());
            match reach {
                Some(v) => writeln!(w, "{phi_txt},{country},{v}")?,
                None => writeln!(w, "{phi_txt},{country},")?,
            }
        }
        Ok(())
    }
}

/// Runs the diffusion simulation for every country at each phi0 in the grid
/// and reports IQR convergence ratios against the no-diffusion distribution.
pub fn convergence_sweep(
    s: &SpecializationMatrix,
    p: &ProximityMatrix,
    prodys: &[ProductIncome],
    phi_grid: &[f64],
    cfg: &DiffusionConfig,
) -> Result<ConvergenceReport> {
    for phi0 in phi_grid {
        if !(*phi0 > 0.0 && *phi0 <= 1.0) {
            return Err(Error::InvalidArgument(format!("phi0 {phi0} outside (0,1]")));
        }
    }
    if s.countries().len() < 4 {
        return Err(Error::UndefinedIqr(format!(
            "need at least 4 countries, have {}",
            s.countries().len()
        )));
    }
    let mut samples = Vec::new();

    // Original distribution: the initial basket with no diffusion rounds.
    let frozen = DiffusionConfig {
        iterations: 0,
        ..*cfg
    };
    let mut original = Vec::new();
    for country in s.countries() {
        let trace = diffuse(s, p, &frozen, country)?;
        let reach = reach_prody(&trace, prodys, cfg.top_n);
        if let Some(v) = reach {
            original.push(v);
        }
        samples.push((None, country.clone(), reach));
    }
    let original_iqr = stats::iqr(&original).ok_or_else(|| {
        Error::UndefinedIqr(format!("only {} countries have a defined reach PRODY", original.len()))
    })?;

    let mut rows = Vec::new();
    for &phi0 in phi_grid {
        let run_cfg = DiffusionConfig { phi0, ..*cfg };
        let mut values = Vec::new();
        for country in s.countries() {
            let trace = diffuse(s, p, &run_cfg, country)?;
            let reach = reach_prody(&trace, prodys, cfg.top_n);
            if let Some(v) = reach {
                values.push(v);
            }
            samples.push((Some(phi0), country.clone(), reach));
        }
        let iqr = stats::iqr(&values).ok_or_else(|| {
            Error::UndefinedIqr(format!("fewer than 4 defined reach values at phi0 {phi0}"))
        })?;
        let ratio = if original_iqr > 0.0 {
            iqr / original_iqr
        } else {
            // Degenerate original distribution; report 1 when diffusion does
            // not spread it and the raw IQR otherwise.
            if iqr == 0.0 {
                1.0
            } else {
                f64::INFINITY
            }
        };
        rows.push(SweepRow { phi0, iqr, ratio });
    }
    Ok(ConvergenceReport {
        original_iqr,
        rows,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(countries: &[&str], products: &[&str], bits: &[u8]) -> SpecializationMatrix {
        SpecializationMatrix::new(
            countries.iter().map(|s| s.to_string()).collect(),
            products.iter().map(|s| s.to_string()).collect(),
            bits.iter().map(|b| *b != 0).collect(),
            1.0,
        )
        .unwrap()
    }

    fn pm(codes: &[&str], phi: &[f64]) -> ProximityMatrix {
        ProximityMatrix::from_dense(codes.iter().map(|s| s.to_string()).collect(), phi.to_vec())
            .unwrap()
    }

    fn chain() -> ProximityMatrix {
        pm(
            &["0001", "0002", "0003"],
            &[
                0.0, 0.7, 0.0, //
                0.7, 0.0, 0.7, //
                0.0, 0.7, 0.0,
            ],
        )
    }

    #[test]
    fn frozen_when_phi0_above_everything() {
        let s = spec(&["AAA"], &["0001", "0002", "0003"], &[1, 0, 0]);
        let cfg = DiffusionConfig::new(0.9).unwrap();
        let trace = diffuse(&s, &chain(), &cfg, "AAA").unwrap();
        assert_eq!(trace.acquired.len(), 1);
        assert_eq!(trace.acquired["0001"], 0);
    }

    #[test]
    fn chain_acquires_step_by_step() {
        let s = spec(&["AAA"], &["0001", "0002", "0003"], &[1, 0, 0]);
        let mut cfg = DiffusionConfig::new(0.65).unwrap();
        cfg.iterations = 2;
        let trace = diffuse(&s, &chain(), &cfg, "AAA").unwrap();
        assert_eq!(trace.acquired["0001"], 0);
        assert_eq!(trace.acquired["0002"], 1);
        assert_eq!(trace.acquired["0003"], 2);
    }

    #[test]
    fn iteration_cap_limits_reach() {
        let s = spec(&["AAA"], &["0001", "0002", "0003"], &[1, 0, 0]);
        let mut cfg = DiffusionConfig::new(0.65).unwrap();
        cfg.iterations = 1;
        let trace = diffuse(&s, &chain(), &cfg, "AAA").unwrap();
        assert!(!trace.acquired.contains_key("0003"));
    }

    #[test]
    fn exclusive_threshold_blocks_equal_phi() {
        let s = spec(&["AAA"], &["0001", "0002", "0003"], &[1, 0, 0]);
        let mut cfg = DiffusionConfig::new(0.7).unwrap();
        let trace = diffuse(&s, &chain(), &cfg, "AAA").unwrap();
        assert_eq!(trace.acquired.len(), 3); // inclusive: 0.7 >= 0.7
        cfg.inclusive = false;
        let trace = diffuse(&s, &chain(), &cfg, "AAA").unwrap();
        assert_eq!(trace.acquired.len(), 1);
    }

    #[test]
    fn unknown_country_is_an_error() {
        let s = spec(&["AAA"], &["0001", "0002", "0003"], &[1, 0, 0]);
        let cfg = DiffusionConfig::new(0.5).unwrap();
        assert!(matches!(
            diffuse(&s, &chain(), &cfg, "ZZZ"),
            Err(Error::UnknownCountry(_))
        ));
    }

    fn income(country: &str, gdp: f64) -> CountryIncome {
        CountryIncome {
            country: country.into(),
            gdp_per_capita: gdp,
            year: 2000,
        }
    }

    #[test]
    fn prody_constant_income_is_that_income() {
        let r = RcaMatrix::new(
            vec!["AAA".into(), "BBB".into()],
            vec!["0001".into(), "0002".into()],
            vec![2.0, 0.5, 1.0, 3.0],
        )
        .unwrap();
        let incomes = [income("AAA", 9000.0), income("BBB", 9000.0)];
        let out = prody(&r, &incomes).unwrap();
        for pi in out {
            assert!((pi.prody - 9000.0).abs() < 1e-9);
        }
    }

    #[test]
    fn prody_weighted_mean_hand_case() {
        let r = RcaMatrix::new(
            vec!["POO".into(), "RIC".into()],
            vec!["0001".into()],
            vec![1.0, 3.0],
        )
        .unwrap();
        let incomes = [income("POO", 3000.0), income("RIC", 30000.0)];
        let out = prody(&r, &incomes).unwrap();
        assert!((out[0].prody - 23250.0).abs() < 1e-9);
    }

    #[test]
    fn prody_single_exporter() {
        let r = RcaMatrix::new(
            vec!["AAA".into(), "BBB".into()],
            vec!["0001".into()],
            vec![2.0, 0.0],
        )
        .unwrap();
        let incomes = [income("AAA", 4000.0), income("BBB", 8000.0)];
        let out = prody(&r, &incomes).unwrap();
        assert_eq!(out[0].prody, 4000.0);
    }

    #[test]
    fn prody_requires_income_data() {
        let r = RcaMatrix::new(vec!["AAA".into()], vec!["0001".into()], vec![1.0]).unwrap();
        assert!(matches!(prody(&r, &[]), Err(Error::EmptyInput(_))));
    }

    #[test]
    fn reach_prody_top_n() {
        let trace = DiffusionTrace {
            country: "AAA".into(),
            acquired: BTreeMap::from([
                ("0001".to_string(), 0),
                ("0002".to_string(), 1),
                ("0003".to_string(), 2),
            ]),
        };
        let prodys = vec![
            ProductIncome {
                product: "0001".into(),
                prody: 10.0,
            },
            ProductIncome {
                product: "0002".into(),
                prody: 20.0,
            },
            ProductIncome {
                product: "0003".into(),
                prody: 30.0,
            },
        ];
        assert_eq!(reach_prody(&trace, &prodys, 2), Some(25.0));
        assert_eq!(reach_prody(&trace, &prodys, 10), Some(20.0));
    }

    #[test]
    fn reach_prody_missing_values_skipped() {
        let trace = DiffusionTrace {
            country: "AAA".into(),
            acquired: BTreeMap::from([("0001".to_string(), 0)]),
        };
        assert_eq!(reach_prody(&trace, &[], 5), None);
    }

    #[test]
    fn sweep_ratio_is_one_when_frozen() {
        // Four countries with distinct one-product baskets; phi0 above all
        // proximities freezes everyone.
        let s = spec(
            &["AAA", "BBB", "CCC", "DDD"],
            &["0001", "0002", "0003", "0004"],
            &[
                1, 0, 0, 0, //
                0, 1, 0, 0, //
                0, 0, 1, 0, //
                0, 0, 0, 1,
            ],
        );
        let p = pm(
            &["0001", "0002", "0003", "0004"],
            &{
                let mut m = vec![0.0; 16];
                for i in 0..4 {
                    for j in 0..4 {
                        if i != j {
                            m[i * 4 + j] = 0.3;
                        }
                    }
                }
                m
            },
        );
        let prodys: Vec<ProductIncome> = (1..=4)
            .map(|k| ProductIncome {
                product: format!("000{k}"),
                prody: 1000.0 * k as f64,
            })
            .collect();
        let cfg = DiffusionConfig::new(0.9).unwrap();
        let report = convergence_sweep(&s, &p, &prodys, &[0.9], &cfg).unwrap();
        assert_eq!(report.rows[0].ratio, 1.0);
    }
}
