//! Balassa revealed comparative advantage and its binarization.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use crate::ingest::ExportMatrix;
use crate::{Error, Result};

/// Country x product matrix of Balassa RCA values.
///
/// Rows of countries with zero total exports and columns of products with
/// zero world exports are zero, never NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct RcaMatrix {
    countries: Vec<String>,
    products: Vec<String>,
    values: Vec<f64>,
}

impl RcaMatrix {
    pub fn new(countries: Vec<String>, products: Vec<String>, values: Vec<f64>) -> Result<Self> {
        if values.len() != countries.len() * products.len() {
            return Err(Error::InvalidArgument("RCA buffer shape mismatch".into()));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidArgument("RCA values must be finite and non-negative".into()));
        }
        Ok(RcaMatrix {
            countries,
            products,
            values,
        })
    }

    pub fn countries(&self) -> &[String] {
        &self.countries
    }

    pub fn products(&self) -> &[String] {
        &self.products
    }

    pub fn value(&self, country: usize, product: usize) -> f64 {
        self.values[country * self.products.len() + product]
    }

    pub fn country_index(&self, code: &str) -> Option<usize> {
        self.countries.iter().position(|c| c == code)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "country,sitc4,rca")?;
        for (c, country) in self.countries.iter().enumerate() {
            for (p, product) in self.products.iter().enumerate() {
                writeln!(w, "{},{},{}", country, product, self.value(c, p))?;
            }
        }
        Ok(())
    }

    /// Reads a long-form RCA CSV back into a matrix; the file must cover the
    /// complete country x product grid.
    pub fn read_csv<R: Read>(r: R) -> Result<RcaMatrix> {
        let mut rdr = csv::Reader::from_reader(r);
        let headers = rdr.headers().map_err(|e| Error::parse("rca", 0, e.to_string()))?;
        if headers.iter().collect::<Vec<_>>() != ["country", "sitc4", "rca"] {
            return Err(Error::parse("rca", 1, "expected header 'country,sitc4,rca'"));
        }
        let mut cells: BTreeMap<(String, String), f64> = BTreeMap::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| Error::parse("rca", 0, e.to_string()))?;
            let line = rec.position().map(|p| p.line()).unwrap_or(0);
            let v: f64 = rec[2]
                .parse()
                .map_err(|_| Error::parse("rca", line, format!("bad rca '{}'", &rec[2])))?;
            if cells.insert((rec[0].to_string(), rec[1].to_string()), v).is_some() {
                return Err(Error::DuplicateKey(format!("{},{}", &rec[0], &rec[1])));
            }
        }
        if cells.is_empty() {
            return Err(Error::EmptyInput("rca CSV has no rows".into()));
        }
        let countries: Vec<String> = cells
            .keys()
            .map(|(c, _)| c.clone())
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .collect();
        let products: Vec<String> = cells
            .keys()
            .map(|(_, p)| p.clone())
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .collect();
        if cells.len() != countries.len() * products.len() {
            return Err(Error::InvalidArgument(
                "rca CSV does not cover the full country x product grid".into(),
            ));
        }
        let mut values = vec![0.0; countries.len() * products.len()];
        for ((c, p), v) in &cells {
            let ci = countries.binary_search(c).unwrap();
            let pi = products.binary_search(p).unwrap();
            values[ci * products.len() + pi] = *v;
        }
        RcaMatrix::new(countries, products, values)
    }
}

/// Boolean specialization matrix: `bits[c][p] = RCA[c][p] > threshold`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpecializationMatrix {
    countries: Vec<String>,
    products: Vec<String>,
    bits: Vec<bool>,
    threshold: f64,
}

impl SpecializationMatrix {
    pub fn new(
        countries: Vec<String>,
        products: Vec<String>,
        bits: Vec<bool>,
        threshold: f64,
    ) -> Result<Self> {
        if bits.len() != countries.len() * products.len() {
            return Err(Error::InvalidArgument("bit buffer shape mismatch".into()));
        }
        if !(threshold > 0.0) {
            return Err(Error::InvalidArgument("threshold must be positive".into()));
        }
        Ok(SpecializationMatrix {
            countries,
            products,
            bits,
            threshold,
        })
    }

    pub fn countries(&self) -> &[String] {
        &self.countries
    }

    pub fn products(&self) -> &[String] {
        &self.products
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn bit(&self, country: usize, product: usize) -> bool {
        self.bits[country * self.products.len() + product]
    }

    pub fn country_index(&self, code: &str) -> Option<usize> {
        self.countries.iter().position(|c| c == code)
    }

    /// The bit row for one country.
    pub fn country_bits(&self, country: usize) -> &[bool] {
        let np = self.products.len();
        &self.bits[country * np..(country + 1) * np]
    }

    /// Indices of countries specialized in `product`.
    pub fn product_support(&self, product: usize) -> Vec<usize> {
        (0..self.countries.len()).filter(|&c| self.bit(c, product)).collect()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "country,sitc4,rca_bit")?;
        for (c, country) in self.countries.iter().enumerate() {
            for (p, product) in self.products.iter().enumerate() {
                writeln!(w, "{},{},{}", country, product, u8::from(self.bit(c, p)))?;
            }
        }
        Ok(())
    }
}

/// Balassa RCA: the country's share of a product in its basket over the
/// world's share of that product in world trade.
pub fn rca(m: &ExportMatrix) -> Result<RcaMatrix> {
    let nc = m.countries().len();
    let np = m.products().len();
    if nc == 0 || np == 0 {
        return Err(Error::EmptyInput("export matrix has no rows or columns".into()));
    }
    let mut country_tot = vec![0.0; nc];
    let mut product_tot = vec![0.0; np];
    let mut world = 0.0;
    for c in 0..nc {
        for p in 0..np {
            let v = m.value(c, p);
            country_tot[c] += v;
            product_tot[p] += v;
            world += v;
        }
    }
    if world == 0.0 {
        return Err(Error::AllZero);
    }
    let mut values = vec![0.0; nc * np];
    for c in 0..nc {
        if country_tot[c] == 0.0 {
            continue;
        }
        for p in 0..np {
            if product_tot[p] == 0.0 {
                continue;
            }
            values[c * np + p] =
                (m.value(c, p) / country_tot[c]) / (product_tot[p] / world);
        }
    }
    RcaMatrix::new(m.countries().to_vec(), m.products().to_vec(), values)
}

/// Binarizes with a strict `>` comparison; RCA exactly at the threshold is
/// not specialized.
pub fn binarize(r: &RcaMatrix, threshold: f64) -> Result<SpecializationMatrix> {
    if !(threshold > 0.0) {
        return Err(Error::InvalidArgument(format!("threshold {threshold} must be positive")));
    }
    let np = r.products().len();
    let bits = (0..r.countries().len() * np).map(|i| r.value(i / np, i % np) > threshold).collect();
    SpecializationMatrix::new(r.countries().to_vec(), r.products().to_vec(), bits, threshold)
}
