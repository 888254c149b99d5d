//! Flag aggregation and slope significance of tree size against a covariate.

use std::collections::BTreeSet;

use crate::detect::{FlagKind, FlagRecord};
use crate::error::{Error, Result};
use crate::tree::{CorpusEntry, Region};

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the gamma function for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // Reflection.
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = LANCZOS[0];
    let t = x + LANCZOS_G + 0.5;
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// Continued fraction for the incomplete beta, modified Lentz.
fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-16;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=10_000 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Regularized incomplete beta `I_x(a, b)`.
pub fn inc_beta(a: f64, b: f64, x: f64) -> f64 {
    assert!(a > 0.0 && b > 0.0, "inc_beta needs positive shape parameters");
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    let front = ln_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_cf(a, b, x) / a
    } else {
        1.0 - front * beta_cf(b, a, 1.0 - x) / b
    }
}

/// Two-sided tail probability of Student's t with `df` degrees of freedom.
pub fn student_t_two_sided(t: f64, df: f64) -> f64 {
    if t.is_nan() {
        return f64::NAN;
    }
    if t.is_infinite() {
        return 0.0;
    }
    inc_beta(df / 2.0, 0.5, df / (df + t * t)).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegressionResult {
    pub slope: f64,
    pub intercept: f64,
    pub p_value: f64,
    pub n: usize,
}

/// Least-squares line through `(covariate, response)` pairs with a two-sided
/// t-test on the slope.
pub fn slope_p_value(pairs: &[(f64, f64)]) -> Result<RegressionResult> {
    let n = pairs.len();
    if n < 3 {
        return Err(Error::TooFewPoints(n));
    }
    let nf = n as f64;
    let mx = pairs.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = pairs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pairs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 || !sxx.is_finite() {
        return Err(Error::ConstantCovariate);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = pairs.iter().map(|p| (p.1 - my - slope * (p.0 - mx)).powi(2)).sum();
    let df = nf - 2.0;
    let p_value = if slope == 0.0 {
        1.0
    } else {
        let se = (sse / df / sxx).sqrt();
        student_t_two_sided(slope / se, df)
    };
    Ok(RegressionResult { slope, intercept, p_value, n })
}

/// Distinct flagged trees per kind and region.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlagSummary {
    /// Indexed by `FlagKind::ALL` position, then `Region::ALL` position.
    pub counts: [[usize; 4]; 3],
    /// Distinct (subject, region) pairs with at least one flag.
    pub total_trees: usize,
    pub corpus_size: usize,
}

fn kind_index(kind: FlagKind) -> usize {
    FlagKind::ALL.iter().position(|&k| k == kind).expect("known kind")
}

impl FlagSummary {
    pub fn kind_total(&self, kind: FlagKind) -> usize {
        self.counts[kind_index(kind)].iter().sum()
    }

    pub fn count(&self, kind: FlagKind, region: Region) -> usize {
        self.counts[kind_index(kind)][region.index()]
    }

    /// Flagged fraction in lowest terms, `None` for an empty corpus.
    pub fn reduced_fraction(&self) -> Option<(usize, usize)> {
        if self.corpus_size == 0 {
            return None;
        }
        let g = gcd(self.total_trees, self.corpus_size);
        Some((self.total_trees / g, self.corpus_size / g))
    }

    pub fn fraction(&self) -> f64 {
        if self.corpus_size == 0 {
            0.0
        } else {
            self.total_trees as f64 / self.corpus_size as f64
        }
    }

    /// Percentage with one decimal, e.g. `23.3`.
    pub fn percent_label(&self) -> String {
        format!("{:.1}", 100.0 * self.fraction())
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 { a.max(1) } else { gcd(b, a % b) }
}

pub fn summarize_flags(records: &[FlagRecord], corpus_size: usize) -> FlagSummary {
    let mut per_cell: [[BTreeSet<&str>; 4]; 3] = Default::default();
    let mut trees = BTreeSet::new();
    for r in records {
        per_cell[kind_index(r.kind)][r.region.index()].insert(r.subject_id.as_str());
        trees.insert((r.subject_id.as_str(), r.region));
    }
    let mut counts = [[0usize; 4]; 3];
    for (k, row) in per_cell.iter().enumerate() {
        for (g, cell) in row.iter().enumerate() {
            counts[k][g] = cell.len();
        }
    }
    FlagSummary { counts, total_trees: trees.len(), corpus_size }
}

/// Flag summary as TSV: one row per kind over B/L/R/F, then totals.
pub fn format_flag_table(summary: &FlagSummary) -> String {
    let mut s = String::from("kind\tB\tL\tR\tF\ttotal\n");
    for kind in FlagKind::ALL {
        let row = &summary.counts[kind_index(kind)];
        s.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\n",
            kind, row[0], row[1], row[2], row[3], summary.kind_total(kind)
        ));
    }
    s.push_str(&format!("flagged_trees\t{}\n", summary.total_trees));
    s.push_str(&format!("corpus_size\t{}\n", summary.corpus_size));
    s.push_str(&format!("fraction\t{}/{}\n", summary.total_trees, summary.corpus_size));
    s.push_str(&format!("percent\t{}\n", summary.percent_label()));
    s
}

/// Regresses `log2(node_count)` on the covariate separately per region,
/// returned in `Region::ALL` order.
pub fn region_age_analysis(corpus: &[CorpusEntry]) -> Result<[RegressionResult; 4]> {
    let missing: BTreeSet<String> = corpus
        .iter()
        .filter(|e| e.covariate.is_none())
        .map(|e| e.tree.subject_id.clone())
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingCovariates(missing.into_iter().collect()));
    }
    let mut pairs: [Vec<(f64, f64)>; 4] = Default::default();
    for e in corpus {
        let age = e.covariate.expect("checked above");
        pairs[e.tree.region.index()].push((age, (e.tree.node_count() as f64).log2()));
    }
    let r = |i: usize| slope_p_value(&pairs[i]);
    Ok([r(0)?, r(1)?, r(2)?, r(3)?])
}

/// Row order of the comparison table.
pub const COMPARISON_ORDER: [Region; 4] = [Region::Back, Region::Front, Region::Right, Region::Left];

pub const PROXY_NOTE: &str =
    "# slope p-values of log2(tree size) against covariate (proxy for tree-line principal component)";

/// One p-value column per labelled corpus, rows Back/Front/Right/Left.
pub fn format_comparison_table(columns: &[(&str, [RegressionResult; 4])]) -> String {
    let mut s = String::from(PROXY_NOTE);
    s.push('\n');
    s.push_str("region");
    for (label, _) in columns {
        s.push_str(&format!("\t{label}"));
    }
    s.push('\n');
    for region in COMPARISON_ORDER {
        s.push_str(region.name());
        for (_, results) in columns {
            s.push_str(&format!("\t{:.4e}", results[region.index()].p_value));
        }
        s.push('\n');
    }
    s
}
