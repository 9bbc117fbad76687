//! Inter-annotator agreement for two raters assigning binary labels.
//!
//! Cell layout of [`ContingencyTable2x2`]:
//!
//! |                  | rater 2 negative | rater 2 positive |
//! |------------------|------------------|------------------|
//! | rater 1 negative | `a`              | `c`              |
//! | rater 1 positive | `b`              | `d`              |

use std::fmt;
use std::io::Read;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ContingencyTable2x2 {
    /// Both raters negative.
    pub a: u64,
    /// Rater 1 positive, rater 2 negative.
    pub b: u64,
    /// Rater 1 negative, rater 2 positive.
    pub c: u64,
    /// Both raters positive.
    pub d: u64,
}

impl ContingencyTable2x2 {
    pub fn new(a: u64, b: u64, c: u64, d: u64) -> Result<Self> {
        let t = ContingencyTable2x2 { a, b, c, d };
        if t.n() == 0 {
            return Err(Error::invalid("contingency table must contain at least one pair"));
        }
        Ok(t)
    }

    pub fn n(&self) -> u64 {
        self.a + self.b + self.c + self.d
    }

    pub fn add(&mut self, rater1: bool, rater2: bool) {
        match (rater1, rater2) {
            (false, false) => self.a += 1,
            (true, false) => self.b += 1,
            (false, true) => self.c += 1,
            (true, true) => self.d += 1,
        }
    }

    /// Swaps positive and negative labels for both raters.
    pub fn swap_labels(&self) -> Self {
        ContingencyTable2x2 {
            a: self.d,
            b: self.c,
            c: self.b,
            d: self.a,
        }
    }

    fn observed(&self) -> f64 {
        (self.a + self.d) as f64 / self.n() as f64
    }

    fn rater1_positive(&self) -> f64 {
        (self.b + self.d) as f64 / self.n() as f64
    }

    fn rater2_positive(&self) -> f64 {
        (self.c + self.d) as f64 / self.n() as f64
    }
}

/// A chance-corrected coefficient. `degenerate` is set when chance agreement
/// is 1 and the ratio is undefined.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Coefficient {
    pub value: f64,
    pub degenerate: bool,
}

fn chance_corrected(observed: f64, chance: f64) -> Coefficient {
    if (1.0 - chance).abs() < 1e-12 {
        let value = if (1.0 - observed).abs() < 1e-12 { 1.0 } else { 0.0 };
        return Coefficient {
            value,
            degenerate: true,
        };
    }
    Coefficient {
        value: (observed - chance) / (1.0 - chance),
        degenerate: false,
    }
}

pub fn percent_agreement(t: &ContingencyTable2x2) -> f64 {
    t.observed()
}

/// Cohen's kappa with chance agreement from the two raters' marginals.
pub fn cohens_kappa(t: &ContingencyTable2x2) -> Coefficient {
    let (p1, p2) = (t.rater1_positive(), t.rater2_positive());
    let chance = p1 * p2 + (1.0 - p1) * (1.0 - p2);
    chance_corrected(t.observed(), chance)
}

/// Gwet's AC1 for two categories: chance agreement is `2π(1 − π)` where `π`
/// is the mean positive-class proportion over both raters.
pub fn gwets_ac1(t: &ContingencyTable2x2) -> Coefficient {
    let pi = (t.rater1_positive() + t.rater2_positive()) / 2.0;
    chance_corrected(t.observed(), 2.0 * pi * (1.0 - pi))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LandisKochBand {
    None,
    Slight,
    Fair,
    Moderate,
    Substantial,
    AlmostPerfect,
}

impl fmt::Display for LandisKochBand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LandisKochBand::None => "no agreement",
            LandisKochBand::Slight => "slight",
            LandisKochBand::Fair => "fair",
            LandisKochBand::Moderate => "moderate",
            LandisKochBand::Substantial => "substantial",
            LandisKochBand::AlmostPerfect => "almost perfect",
        })
    }
}

/// Maps a coefficient onto the band whose closed two-decimal interval holds
/// `value` rounded half away from zero to two decimals.
pub fn landis_koch_band(value: f64) -> LandisKochBand {
    // The nudge keeps decimal ties such as 0.205 (stored as 0.20499..) on the
    // side a reader expects.
    let hundredths = ((value.abs() * 100.0) + 1e-9).round() * value.signum();
    match hundredths as i64 {
        i64::MIN..=0 => LandisKochBand::None,
        1..=20 => LandisKochBand::Slight,
        21..=40 => LandisKochBand::Fair,
        41..=60 => LandisKochBand::Moderate,
        61..=80 => LandisKochBand::Substantial,
        _ => LandisKochBand::AlmostPerfect,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgreementReport {
    pub table: ContingencyTable2x2,
    pub n: u64,
    pub percent_agreement: f64,
    pub cohens_kappa: Coefficient,
    pub gwets_ac1: Coefficient,
    pub kappa_band: LandisKochBand,
    pub ac1_band: LandisKochBand,
}

impl AgreementReport {
    pub fn from_table(table: ContingencyTable2x2) -> Self {
        let kappa = cohens_kappa(&table);
        let ac1 = gwets_ac1(&table);
        AgreementReport {
            table,
            n: table.n(),
            percent_agreement: percent_agreement(&table),
            cohens_kappa: kappa,
            gwets_ac1: ac1,
            kappa_band: landis_koch_band(kappa.value),
            ac1_band: landis_koch_band(ac1.value),
        }
    }

    /// Plain-text table: counts with rater 1 across the columns, then the
    /// summary coefficients.
    pub fn to_text(&self) -> String {
        let t = &self.table;
        let mut out = String::new();
        out.push_str(&format!("Inter-annotator agreement (n={})\n", self.n));
        out.push_str(&format!("{:<16}{:>16}{:>16}\n", "", "rater1: no need", "rater1: need"));
        out.push_str(&format!("{:<16}{:>16}{:>16}\n", "rater2: no need", t.a, t.b));
        out.push_str(&format!("{:<16}{:>16}{:>16}\n", "rater2: need", t.c, t.d));
        out.push_str(&format!(
            "Agreement       {:.2}%\n",
            self.percent_agreement * 100.0
        ));
        out.push_str(&format!(
            "Cohen's Kappa   {:.3} ({}){}\n",
            self.cohens_kappa.value,
            self.kappa_band,
            if self.cohens_kappa.degenerate { " [degenerate]" } else { "" }
        ));
        out.push_str(&format!(
            "Gwet's AC1      {:.3} ({}){}\n",
            self.gwets_ac1.value,
            self.ac1_band,
            if self.gwets_ac1.degenerate { " [degenerate]" } else { "" }
        ));
        out
    }
}

fn parse_rating(raw: &str) -> std::result::Result<bool, String> {
    match raw.trim() {
        "0" => Ok(false),
        "1" => Ok(true),
        "" => Err("missing rating".into()),
        other => Err(format!("bad rating '{other}' (expected 0 or 1)")),
    }
}

/// Accumulates a `review_id,rater1,rater2` CSV into a contingency table.
pub fn read_pairs<R: Read>(reader: R, origin: &str) -> Result<ContingencyTable2x2> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let row_err = |row: usize, violation: String| Error::Row {
        path: origin.to_string(),
        row,
        violation,
    };
    let headers = rdr.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| row_err(1, format!("missing column '{name}' in header")))
    };
    let (c1, c2) = (col("rater1")?, col("rater2")?);
    col("review_id")?;

    let mut table = ContingencyTable2x2 { a: 0, b: 0, c: 0, d: 0 };
    for record in rdr.records() {
        let record = record?;
        let row = record.position().map_or(0, |p| p.line() as usize);
        let r1 = parse_rating(record.get(c1).unwrap_or("")).map_err(|v| row_err(row, v))?;
        let r2 = parse_rating(record.get(c2).unwrap_or("")).map_err(|v| row_err(row, v))?;
        table.add(r1, r2);
    }
    if table.n() == 0 {
        return Err(row_err(1, "no rating pairs".into()));
    }
    Ok(table)
}

pub fn pair_annotations(path: impl AsRef<Path>) -> Result<ContingencyTable2x2> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_pairs(file, &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn published() -> ContingencyTable2x2 {
        ContingencyTable2x2::new(448, 17, 7, 13).unwrap()
    }

    #[test]
    fn published_table_values() {
        let t = published();
        assert_eq!(t.n(), 485);
        assert_abs_diff_eq!(percent_agreement(&t), 0.9505, epsilon = 1e-4);
        assert_abs_diff_eq!(cohens_kappa(&t).value, 0.495, epsilon = 1e-3);
        assert_abs_diff_eq!(gwets_ac1(&t).value, 0.945, epsilon = 1e-3);
    }

    #[test]
    fn small_table_by_hand() {
        // p_o = 4/6, p_e = 0.5 for both coefficients.
        let t = ContingencyTable2x2::new(2, 1, 1, 2).unwrap();
        assert_abs_diff_eq!(percent_agreement(&t), 4.0 / 6.0, epsilon = 1e-12);
        assert_abs_diff_eq!(cohens_kappa(&t).value, 1.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(gwets_ac1(&t).value, 1.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn perfect_diagonal() {
        let t = ContingencyTable2x2::new(10, 0, 0, 10).unwrap();
        assert_eq!(percent_agreement(&t), 1.0);
        assert_eq!(cohens_kappa(&t).value, 1.0);
        assert_eq!(gwets_ac1(&t).value, 1.0);
        let t = ContingencyTable2x2::new(7, 0, 0, 7).unwrap();
        assert_eq!(percent_agreement(&t), 1.0);
    }

    #[test]
    fn degenerate_marginals() {
        let t = ContingencyTable2x2::new(9, 0, 0, 0).unwrap();
        let k = cohens_kappa(&t);
        assert!(k.degenerate);
        assert_eq!(k.value, 1.0);
        // AC1 chance agreement is 0 here, so it simply equals p_o.
        assert_eq!(gwets_ac1(&t), Coefficient { value: 1.0, degenerate: false });
        assert!(ContingencyTable2x2::new(0, 0, 0, 0).is_err());
    }

    #[test]
    fn bands() {
        assert_eq!(landis_koch_band(0.495), LandisKochBand::Moderate);
        assert_eq!(landis_koch_band(0.945), LandisKochBand::AlmostPerfect);
        assert_eq!(landis_koch_band(1.0), LandisKochBand::AlmostPerfect);
        assert_eq!(landis_koch_band(0.205), LandisKochBand::Fair);
        assert_eq!(landis_koch_band(0.204), LandisKochBand::Slight);
        assert_eq!(landis_koch_band(0.004), LandisKochBand::None);
        assert_eq!(landis_koch_band(0.005), LandisKochBand::Slight);
        assert_eq!(landis_koch_band(-0.3), LandisKochBand::None);
        assert_eq!(landis_koch_band(0.805), LandisKochBand::AlmostPerfect);
        assert_eq!(landis_koch_band(0.6), LandisKochBand::Moderate);
    }

    #[test]
    fn pairs_csv() {
        let csv = "review_id,rater1,rater2\nr1,0,0\nr2,1,0\nr3,0,1\nr4,1,1\nr5,1,1\n";
        let t = read_pairs(csv.as_bytes(), "pairs.csv").unwrap();
        assert_eq!(t, ContingencyTable2x2 { a: 1, b: 1, c: 1, d: 2 });

        let err = read_pairs("review_id,rater1,rater2\nr1,0,\n".as_bytes(), "p").unwrap_err();
        assert!(err.to_string().contains("row 2: missing rating"), "{err}");
        let err = read_pairs("review_id,rater1,rater2\nr1,0,2\n".as_bytes(), "p").unwrap_err();
        assert!(err.to_string().contains("bad rating '2'"), "{err}");
        assert!(read_pairs("review_id,rater1\n".as_bytes(), "p").is_err());
    }

    #[test]
    fn report_text_has_coefficients() {
        let text = AgreementReport::from_table(published()).to_text();
        assert!(text.contains("95.05%"), "{text}");
        assert!(text.contains("0.495 (moderate)"), "{text}");
        assert!(text.contains("0.945 (almost perfect)"), "{text}");
    }

    #[test]
    fn ac1_resists_prevalence_paradox() {
        let t = published();
        assert!(gwets_ac1(&t).value > cohens_kappa(&t).value);
    }

    proptest! {
        #[test]
        fn label_swap_invariance(a in 0u64..200, b in 0u64..50, c in 0u64..50, d in 0u64..200) {
            prop_assume!(a + b + c + d > 0);
            let t = ContingencyTable2x2 { a, b, c, d };
            let s = t.swap_labels();
            prop_assert!((cohens_kappa(&t).value - cohens_kappa(&s).value).abs() < 1e-12);
            prop_assert!((gwets_ac1(&t).value - gwets_ac1(&s).value).abs() < 1e-12);
        }

        #[test]
        fn perfect_agreement_iff_no_disagreement(a in 1u64..200, b in 0u64..5, c in 0u64..5, d in 1u64..200) {
            let t = ContingencyTable2x2 { a, b, c, d };
            let perfect = b == 0 && c == 0;
            prop_assert_eq!(cohens_kappa(&t).value == 1.0, perfect);
            prop_assert_eq!(gwets_ac1(&t).value == 1.0, perfect);
        }

        #[test]
        fn coefficients_in_range(a in 0u64..100, b in 0u64..100, c in 0u64..100, d in 0u64..100) {
            prop_assume!(a + b + c + d > 0);
            let t = ContingencyTable2x2 { a, b, c, d };
            for v in [cohens_kappa(&t).value, gwets_ac1(&t).value] {
                prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&v));
            }
        }
    }
}
