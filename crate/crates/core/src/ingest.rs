//! Trade-flow, income and product-metadata ingestion.
//!
//! Input formats:
//! - trade CSV: `year,exporter,sitc4,value` (value in thousands of current USD)
//! - income CSV: `country,year,gdp_pc`
//! - metadata CSV: `sitc4,name,leamer_class` (last column optional)
//!
//! Multi-year windows are pooled into a single [`ExportMatrix`]: for each
//! country the pooled value is the mean of its yearly totals over the years in
//! which the country reports any trade, with missing (country, product, year)
//! cells treated as zero. Countries absent from every year of the window are
//! dropped.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TradeRecord {
    pub year: i32,
    pub exporter: String,
    pub product: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CountryIncome {
    pub country: String,
    pub gdp_per_capita: f64,
    pub year: i32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProductMeta {
    pub product: String,
    pub name: String,
    pub leamer_class: Option<String>,
}

/// Dense country x product matrix of pooled export values for a year window.
///
/// Country and product code lists are sorted and duplicate-free; every cell is
/// a non-negative finite value.
#[derive(Debug, Clone, PartialEq)]
pub struct ExportMatrix {
    countries: Vec<String>,
    products: Vec<String>,
    values: Vec<f64>,
    window: (i32, i32),
}

impl ExportMatrix {
    /// Builds a matrix from pre-sorted code lists and a row-major value
    /// buffer, validating every structural invariant.
    pub fn new(
        countries: Vec<String>,
        products: Vec<String>,
        values: Vec<f64>,
        window: (i32, i32),
    ) -> Result<Self> {
        if window.0 > window.1 {
            return Err(Error::InvalidArgument(format!(
                "window {}:{} is empty",
                window.0, window.1
            )));
        }
        if values.len() != countries.len() * products.len() {
            return Err(Error::InvalidArgument(format!(
                "value buffer has {} cells, expected {}x{}",
                values.len(),
                countries.len(),
                products.len()
            )));
        }
        for list in [&countries, &products] {
            if list.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidArgument(
                    "code lists must be sorted and duplicate-free".into(),
                ));
            }
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidArgument(
                "export values must be finite and non-negative".into(),
            ));
        }
        Ok(ExportMatrix {
            countries,
            products,
            values,
            window,
        })
    }

    pub fn countries(&self) -> &[String] {
        &self.countries
    }

    pub fn products(&self) -> &[String] {
        &self.products
    }

    pub fn window(&self) -> (i32, i32) {
        self.window
    }

    pub fn value(&self, country: usize, product: usize) -> f64 {
        self.values[country * self.products.len() + product]
    }

    pub fn country_index(&self, code: &str) -> Option<usize> {
        self.countries.binary_search_by(|c| c.as_str().cmp(code)).ok()
    }

    pub fn product_index(&self, code: &str) -> Option<usize> {
        self.products.binary_search_by(|p| p.as_str().cmp(code)).ok()
    }

    /// Drops every country whose total pooled export falls below `min_total`.
    pub fn filter_countries(&self, min_total: f64) -> Result<ExportMatrix> {
        let np = self.products.len();
        let mut countries = Vec::new();
        let mut values = Vec::new();
        for (c, code) in self.countries.iter().enumerate() {
            let row = &self.values[c * np..(c + 1) * np];
            if row.iter().sum::<f64>() >= min_total {
                countries.push(code.clone());
                values.extend_from_slice(row);
            }
        }
        if countries.is_empty() {
            return Err(Error::EmptyInput(format!(
                "no country reaches the minimum export total {min_total}"
            )));
        }
        ExportMatrix::new(countries, self.products.clone(), values, self.window)
    }

    /// Writes the matrix as long-form CSV `country,sitc4,value`, all cells
    /// included so the shape round-trips exactly.
    pub fn write_long_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "country,sitc4,value")?;
        for (c, country) in self.countries.iter().enumerate() {
            for (p, product) in self.products.iter().enumerate() {
                writeln!(w, "{},{},{}", country, product, self.value(c, p))?;
            }
        }
        Ok(())
    }

    /// Reads a matrix previously written by [`write_long_csv`]; the window is
    /// carried out of band (the run configuration).
    ///
    /// [`write_long_csv`]: ExportMatrix::write_long_csv
    pub fn read_long_csv<R: Read>(r: R, window: (i32, i32)) -> Result<ExportMatrix> {
        let mut rdr = csv::Reader::from_reader(r);
        expect_header(&mut rdr, "matrix", &["country", "sitc4", "value"])?;
        let mut cells: BTreeMap<(String, String), f64> = BTreeMap::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| csv_error("matrix", e))?;
            let line = record_line(&rec);
            if rec.len() != 3 {
                return Err(Error::parse("matrix", line, "expected 3 columns"));
            }
            let value: f64 = rec[2]
                .parse()
                .map_err(|_| Error::parse("matrix", line, format!("bad value '{}'", &rec[2])))?;
            if !value.is_finite() || value < 0.0 {
                return Err(Error::parse("matrix", line, format!("negative value {value}")));
            }
            if cells.insert((rec[0].to_string(), rec[1].to_string()), value).is_some() {
                return Err(Error::DuplicateKey(format!("{},{}", &rec[0], &rec[1])));
            }
        }
        if cells.is_empty() {
            return Err(Error::EmptyInput("matrix CSV has no rows".into()));
        }
        let countries: Vec<String> = cells.keys().map(|(c, _)| c.clone()).collect::<BTreeSet<_>>().into_iter().collect();
        let products: Vec<String> = cells.keys().map(|(_, p)| p.clone()).collect::<BTreeSet<_>>().into_iter().collect();
        let mut values = vec![0.0; countries.len() * products.len()];
        for ((c, p), v) in &cells {
            let ci = countries.binary_search(c).unwrap();
            let pi = products.binary_search(p).unwrap();
            values[ci * products.len() + pi] = *v;
        }
        ExportMatrix::new(countries, products, values, window)
    }
}

fn sitc4_ok(code: &str) -> bool {
    code.len() == 4 && code.bytes().all(|b| b.is_ascii_digit())
}

fn record_line(rec: &csv::StringRecord) -> u64 {
    rec.position().map(|p| p.line()).unwrap_or(0)
}

fn csv_error(path: &str, e: csv::Error) -> Error {
    let line = match e.kind() {
        csv::ErrorKind::Utf8 { pos, .. } | csv::ErrorKind::UnequalLengths { pos, .. } => {
            pos.as_ref().map(|p| p.line()).unwrap_or(0)
        }
        _ => 0,
    };
    Error::parse(path, line, e.to_string())
}

fn expect_header<R: Read>(rdr: &mut csv::Reader<R>, path: &str, want: &[&str]) -> Result<()> {
    let headers = rdr.headers().map_err(|e| csv_error(path, e))?;
    let got: Vec<&str> = headers.iter().collect();
    if got.len() < want.len() || got[..want.len()] != *want {
        return Err(Error::parse(
            path,
            1,
            format!("expected header '{}', got '{}'", want.join(","), got.join(",")),
        ));
    }
    Ok(())
}

/// Loads trade rows for `window` (inclusive) and pools them into an
/// [`ExportMatrix`]. Rows outside the window are validated but ignored;
/// duplicate (year, exporter, product) rows are summed with a warning.
pub fn load_trade(path: &Path, window: (i32, i32)) -> Result<ExportMatrix> {
    if window.0 > window.1 {
        return Err(Error::InvalidArgument(format!(
            "window {}:{} is empty",
            window.0, window.1
        )));
    }
    let name = path.display().to_string();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::Reader::from_reader(file);
    expect_header(&mut rdr, &name, &["year", "exporter", "sitc4", "value"])?;

    // (country, product, year) -> summed value; per-country set of years seen.
    let mut yearly: BTreeMap<(String, String, i32), f64> = BTreeMap::new();
    let mut years_seen: BTreeMap<String, BTreeSet<i32>> = BTreeMap::new();
    let mut products: BTreeSet<String> = BTreeSet::new();

    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_error(&name, e))?;
        let line = record_line(&rec);
        if rec.len() != 4 {
            return Err(Error::parse(&name, line, format!("expected 4 columns, got {}", rec.len())));
        }
        let year: i32 = rec[0]
            .parse()
            .map_err(|_| Error::parse(&name, line, format!("bad year '{}'", &rec[0])))?;
        let exporter = rec[1].trim().to_string();
        if exporter.is_empty() {
            return Err(Error::parse(&name, line, "empty exporter code"));
        }
        let product = rec[2].trim().to_string();
        if !sitc4_ok(&product) {
            return Err(Error::parse(
                &name,
                line,
                format!("product code '{product}' is not a 4-digit SITC code"),
            ));
        }
        let value: f64 = rec[3]
            .parse()
            .map_err(|_| Error::parse(&name, line, format!("bad value '{}'", &rec[3])))?;
        if !value.is_finite() || value < 0.0 {
            return Err(Error::parse(&name, line, format!("negative export value {value}")));
        }
        if year < window.0 || year > window.1 {
            continue;
        }
        years_seen.entry(exporter.clone()).or_default().insert(year);
        products.insert(product.clone());
        let key = (exporter, product, year);
        match yearly.entry(key) {
            std::collections::btree_map::Entry::Occupied(mut e) => {
                log::warn!(
                    "{name}:{line}: duplicate row for ({}, {}, {}), summing",
                    e.key().0,
                    e.key().1,
                    e.key().2
                );
                *e.get_mut() += value;
            }
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(value);
            }
        }
    }

    if years_seen.is_empty() {
        return Err(Error::EmptyInput(format!(
            "{name}: no trade rows inside window {}:{}",
            window.0, window.1
        )));
    }

    let countries: Vec<String> = years_seen.keys().cloned().collect();
    let products: Vec<String> = products.into_iter().collect();
    let np = products.len();
    let mut values = vec![0.0; countries.len() * np];
    for ((country, product, _year), v) in &yearly {
        let ci = countries.binary_search(country).unwrap();
        let pi = products.binary_search(product).unwrap();
        values[ci * np + pi] += v;
    }
    for (ci, country) in countries.iter().enumerate() {
        let n_years = years_seen[country].len() as f64;
        for cell in &mut values[ci * np..(ci + 1) * np] {
            *cell /= n_years;
        }
    }
    ExportMatrix::new(countries, products, values, window)
}

/// Loads GDP-per-capita records for one year. Countries missing that year are
/// omitted; an empty result only logs a warning.
pub fn load_income(path: &Path, year: i32) -> Result<Vec<CountryIncome>> {
    let name = path.display().to_string();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::Reader::from_reader(file);
    expect_header(&mut rdr, &name, &["country", "year", "gdp_pc"])?;
    let mut seen: BTreeSet<(String, i32)> = BTreeSet::new();
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_error(&name, e))?;
        let line = record_line(&rec);
        if rec.len() != 3 {
            return Err(Error::parse(&name, line, format!("expected 3 columns, got {}", rec.len())));
        }
        let country = rec[0].trim().to_string();
        let row_year: i32 = rec[1]
            .parse()
            .map_err(|_| Error::parse(&name, line, format!("bad year '{}'", &rec[1])))?;
        let gdp: f64 = rec[2]
            .parse()
            .map_err(|_| Error::parse(&name, line, format!("bad gdp_pc '{}'", &rec[2])))?;
        if !gdp.is_finite() || gdp <= 0.0 {
            return Err(Error::parse(&name, line, format!("non-positive gdp_pc {gdp}")));
        }
        if !seen.insert((country.clone(), row_year)) {
            return Err(Error::DuplicateKey(format!("{country},{row_year}")));
        }
        if row_year == year {
            out.push(CountryIncome {
                country,
                gdp_per_capita: gdp,
                year,
            });
        }
    }
    if out.is_empty() {
        log::warn!("{name}: no income records for year {year}");
    }
    out.sort_by(|a, b| a.country.cmp(&b.country));
    Ok(out)
}

/// Loads the product metadata table; the `leamer_class` column is optional.
pub fn load_meta(path: &Path) -> Result<Vec<ProductMeta>> {
    let name = path.display().to_string();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(file);
    expect_header(&mut rdr, &name, &["sitc4", "name"])?;
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_error(&name, e))?;
        let line = record_line(&rec);
        if rec.len() < 2 {
            return Err(Error::parse(&name, line, "expected at least 2 columns"));
        }
        let product = rec[0].trim().to_string();
        if !sitc4_ok(&product) {
            return Err(Error::parse(&name, line, format!("bad SITC code '{product}'")));
        }
        if !seen.insert(product.clone()) {
            return Err(Error::DuplicateKey(product));
        }
        let leamer = rec.get(2).map(str::trim).filter(|s| !s.is_empty()).map(String::from);
        out.push(ProductMeta {
            product,
            name: rec[1].trim().to_string(),
            leamer_class: leamer,
        });
    }
    Ok(out)
}

/// Sums member-country rows into one row per region. Groups must be disjoint
/// and every member must exist in the matrix.
pub fn aggregate_region(
    m: &ExportMatrix,
    groups: &BTreeMap<String, BTreeSet<String>>,
) -> Result<ExportMatrix> {
    let mut assigned: BTreeSet<&str> = BTreeSet::new();
    for members in groups.values() {
        for code in members {
            if !assigned.insert(code) {
                return Err(Error::OverlappingGroups(code.clone()));
            }
            if m.country_index(code).is_none() {
                return Err(Error::UnknownCountry(code.clone()));
            }
        }
    }
    if groups.is_empty() {
        return Err(Error::EmptyInput("no region groups given".into()));
    }
    let np = m.products.len();
    let regions: Vec<String> = groups.keys().cloned().collect();
    let mut values = vec![0.0; regions.len() * np];
    for (ri, region) in regions.iter().enumerate() {
        for code in &groups[region] {
            let ci = m.country_index(code).unwrap();
            for p in 0..np {
                values[ri * np + p] += m.value(ci, p);
            }
        }
    }
    ExportMatrix::new(regions, m.products.clone(), values, m.window)
}

/// Reads a `region,country` CSV into the group map used by
/// [`aggregate_region`].
pub fn load_regions(path: &Path) -> Result<BTreeMap<String, BTreeSet<String>>> {
    let name = path.display().to_string();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::Reader::from_reader(file);
    expect_header(&mut rdr, &name, &["region", "country"])?;
    let mut groups: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_error(&name, e))?;
        let line = record_line(&rec);
        if rec.len() != 2 {
            return Err(Error::parse(&name, line, "expected 2 columns"));
        }
        groups
            .entry(rec[0].trim().to_string())
            .or_default()
            .insert(rec[1].trim().to_string());
    }
    if groups.is_empty() {
        return Err(Error::EmptyInput(format!("{name}: no region rows")));
    }
    Ok(groups)
}
