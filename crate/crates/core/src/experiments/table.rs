use std::collections::HashMap;
use std::hash::{Hash, Hasher};
use std::io::Write;

use crate::solvers::Direction;

use super::{Setting, StudyError};

pub const CSV_HEADER: [&str; 12] = [
    "n", "d_base", "nu_d", "nu_s", "lambda", "lag", "algorithm", "direction", "metric", "value", "N", "seed",
];

/// A generator axis that a table can be grouped by.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    N,
    DBase,
    NuD,
    NuS,
    Lambda,
}

impl Axis {
    pub const ALL: [Axis; 5] = [Axis::N, Axis::DBase, Axis::NuD, Axis::NuS, Axis::Lambda];
}

/// Parameter coordinates of a row; `None` marks an axis aggregated over.
#[derive(Debug, Clone, Copy, Default)]
pub struct GroupKey {
    pub n: Option<usize>,
    pub d_base: Option<f64>,
    pub nu_d: Option<f64>,
    pub nu_s: Option<f64>,
    pub lambda: Option<f64>,
}

impl GroupKey {
    fn bits(&self) -> [Option<u64>; 5] {
        [
            self.n.map(|n| n as u64),
            self.d_base.map(f64::to_bits),
            self.nu_d.map(f64::to_bits),
            self.nu_s.map(f64::to_bits),
            self.lambda.map(f64::to_bits),
        ]
    }

    pub fn project(setting: &Setting, keep: &[Axis]) -> Self {
        let has = |a: Axis| keep.contains(&a);
        GroupKey {
            n: has(Axis::N).then_some(setting.n),
            d_base: has(Axis::DBase).then_some(setting.d_base),
            nu_d: has(Axis::NuD).then_some(setting.nu_d),
            nu_s: has(Axis::NuS).then_some(setting.nu_s),
            lambda: has(Axis::Lambda).then_some(setting.lambda),
        }
    }
}

impl PartialEq for GroupKey {
    fn eq(&self, other: &Self) -> bool {
        self.bits() == other.bits()
    }
}

impl Eq for GroupKey {}

impl Hash for GroupKey {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.bits().hash(state);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyRow {
    pub key: GroupKey,
    pub lag: Option<usize>,
    pub algorithm: String,
    pub direction: Direction,
    pub metric: String,
    pub value: f64,
    /// Systems aggregated into the row.
    pub count: usize,
    pub seed: u64,
}

impl StudyRow {
    fn record(&self) -> [String; 12] {
        fn opt<T>(v: Option<T>, f: impl Fn(T) -> String) -> String {
            v.map(f).unwrap_or_else(|| "all".to_string())
        }
        [
            opt(self.key.n, |n| n.to_string()),
            opt(self.key.d_base, format_sig6),
            opt(self.key.nu_d, format_sig6),
            opt(self.key.nu_s, format_sig6),
            opt(self.key.lambda, format_sig6),
            self.lag.map(|l| l.to_string()).unwrap_or_default(),
            self.algorithm.clone(),
            self.direction.as_str().to_string(),
            self.metric.clone(),
            format_sig6(self.value),
            self.count.to_string(),
            self.seed.to_string(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct StudyTable {
    pub rows: Vec<StudyRow>,
}

impl StudyTable {
    pub fn extend(&mut self, other: StudyTable) {
        self.rows.extend(other.rows);
    }

    /// The first row matching every given coordinate.
    pub fn find(&self, key: &GroupKey, algorithm: &str, lag: Option<usize>, metric: &str) -> Option<&StudyRow> {
        self.rows
            .iter()
            .find(|r| r.key == *key && r.algorithm == algorithm && r.lag == lag && r.metric == metric)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), StudyError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_HEADER)?;
        for row in &self.rows {
            w.write_record(row.record())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String, StudyError> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is UTF-8"))
    }
}

/// Formats with six significant digits, in the style of C's `%g`.
pub fn format_sig6(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Groups items by key in order of first appearance.
pub(crate) fn group_in_order<K: Hash + Eq + Clone, T>(items: impl IntoIterator<Item = (K, T)>) -> Vec<(K, Vec<T>)> {
    let mut index: HashMap<K, usize> = HashMap::new();
    let mut groups: Vec<(K, Vec<T>)> = Vec::new();
    for (k, v) in items {
        match index.get(&k) {
            Some(&i) => groups[i].1.push(v),
            None => {
                index.insert(k.clone(), groups.len());
                groups.push((k, vec![v]));
            }
        }
    }
    groups
}

pub(crate) fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Median; the mean of the two middle values for even lengths.
pub(crate) fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        (v[m - 1] + v[m]) / 2.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig6_formatting() {
        assert_eq!(format_sig6(0.0), "0");
        assert_eq!(format_sig6(1.5), "1.5");
        assert_eq!(format_sig6(0.09379), "0.09379");
        assert_eq!(format_sig6(1.0 / 3.0), "0.333333");
        assert_eq!(format_sig6(123456.7), "123457");
        assert_eq!(format_sig6(1234567.0), "1.23457e6");
        assert_eq!(format_sig6(0.00001234), "1.234e-5");
        assert_eq!(format_sig6(-2.5e-3), "-0.0025");
        assert_eq!(format_sig6(9.999996), "10");
    }

    #[test]
    fn csv_layout() {
        let table = StudyTable {
            rows: vec![StudyRow {
                key: GroupKey {
                    n: Some(5),
                    ..GroupKey::default()
                },
                lag: Some(2),
                algorithm: "TP".into(),
                direction: Direction::Decreasing,
                metric: "error_rate".into(),
                value: 0.1,
                count: 200,
                seed: 7,
            }],
        };
        let text = table.to_csv_string().unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER.join(","));
        assert_eq!(lines.next().unwrap(), "5,all,all,all,all,2,TP,decreasing,error_rate,0.1,200,7");
    }

    #[test]
    fn medians_and_groups() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        let g = group_in_order([(1, 'a'), (2, 'b'), (1, 'c')]);
        assert_eq!(g, vec![(1, vec!['a', 'c']), (2, vec!['b'])]);
    }
}
