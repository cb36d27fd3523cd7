//! Triangular fuzzy partition of the Career-Readiness scale.
//!
//! A [`FuzzyPartition`] is an ordered list of linguistic terms, least ready
//! first, each with a triangular membership function. [`FuzzyPartition::fuzzify`]
//! turns a crisp predicted score into a [`LinguisticAssessment`] by taking the
//! term of highest membership; ties go to the less ready term.
//!
//! ```
//! use readiness::fuzzy::FuzzyPartition;
//!
//! let p = FuzzyPartition::default_partition();
//! let verdict = p.fuzzify(9.0).unwrap();
//! assert_eq!(verdict.chosen_term, "High");
//! assert!((verdict.chosen_degree - 3.5 / 4.5).abs() < 1e-12);
//! ```

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FuzzyError {
    #[error("InvalidTriangle: {label} ({a}, {b}, {c}) needs a <= b <= c and a < c")]
    InvalidTriangle { label: String, a: f64, b: f64, c: f64 },
    #[error("InvalidDomain: [{0}, {1}]")]
    InvalidDomain(f64, f64),
    #[error("EmptyPartition: at least one term is required")]
    EmptyPartition,
    #[error("DuplicateTerm: {0}")]
    DuplicateTerm(String),
    #[error("UnorderedTerms: peak of {0} precedes the peak of the term before it")]
    UnorderedTerms(String),
    #[error("PeakOutsideDomain: peak of {0} lies outside the domain")]
    PeakOutsideDomain(String),
    #[error("CoverageGap: no term has positive membership at {0}")]
    CoverageGap(f64),
    #[error("NotRuspini: memberships sum to {sum} at {at}")]
    NotRuspini { at: f64, sum: f64 },
    #[error("UnknownTerm: {0}")]
    UnknownTerm(String),
    #[error("AlphaOutOfRange: {0} is not in (0, 1]")]
    AlphaOutOfRange(f64),
    #[error("NonFinite: score {0}")]
    NonFinite(f64),
    #[error("InvalidSpec: {0}")]
    InvalidSpec(String),
}

/// Triangular membership function with feet `a`, `c` and peak `b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Triangle {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Triangle {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self, FuzzyError> {
        let t = Triangle { a, b, c };
        t.check("triangle")?;
        Ok(t)
    }

    fn check(&self, label: &str) -> Result<(), FuzzyError> {
        let Triangle { a, b, c } = *self;
        let finite = a.is_finite() && b.is_finite() && c.is_finite();
        if !finite || !(a <= b && b <= c && a < c) {
            return Err(FuzzyError::InvalidTriangle {
                label: label.to_string(),
                a,
                b,
                c,
            });
        }
        Ok(())
    }

    /// 0 outside `[a, c]`, 1 at `b`, linear in between. A shoulder (`a == b`
    /// or `b == c`) has membership 1 on its flat edge.
    pub fn membership(&self, x: f64) -> f64 {
        let Triangle { a, b, c } = *self;
        if x < a || x > c {
            0.0
        } else if x == b {
            1.0
        } else if x < b {
            (x - a) / (b - a)
        } else {
            (c - x) / (c - b)
        }
    }

    /// `{x | membership(x) >= alpha}` for `0 < alpha <= 1`:
    /// `[a + alpha (b - a), c - alpha (c - b)]`.
    pub fn alpha_cut(&self, alpha: f64) -> Result<Interval, FuzzyError> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(FuzzyError::AlphaOutOfRange(alpha));
        }
        Ok(Interval {
            lo: self.a + alpha * (self.b - self.a),
            hi: self.c - alpha * (self.c - self.b),
        })
    }
}

/// Closed interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn is_subset_of(&self, other: &Interval) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub label: String,
    pub triangle: Triangle,
}

impl Term {
    pub fn new(label: &str, a: f64, b: f64, c: f64) -> Self {
        Term {
            label: canonical_label(label).to_string(),
            triangle: Triangle { a, b, c },
        }
    }
}

/// "Poor" and "Low" name the same bottom term; "Low" is canonical.
pub fn canonical_label(label: &str) -> &str {
    if label.eq_ignore_ascii_case("poor") || label.eq_ignore_ascii_case("low") {
        "Low"
    } else {
        label
    }
}

/// Linguistic variable: ordered terms over a closed domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzyPartition {
    variable_name: String,
    terms: Vec<Term>,
    domain: Interval,
}

/// Name of the default linguistic variable.
pub const CAREER_READINESS: &str = "Career Readiness";

impl FuzzyPartition {
    /// Validates and builds a partition.
    ///
    /// Checks triangle shapes, unique labels, non-decreasing peaks inside the
    /// domain, and that every domain point has positive membership in some
    /// term. With `require_ruspini` the memberships must also sum to 1 across
    /// the domain (within 1e-12).
    pub fn new(
        variable_name: &str,
        terms: Vec<Term>,
        domain: (f64, f64),
        require_ruspini: bool,
    ) -> Result<Self, FuzzyError> {
        let (lo, hi) = domain;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(FuzzyError::InvalidDomain(lo, hi));
        }
        if terms.is_empty() {
            return Err(FuzzyError::EmptyPartition);
        }
        let terms: Vec<Term> = terms
            .into_iter()
            .map(|t| Term {
                label: canonical_label(&t.label).to_string(),
                ..t
            })
            .collect();
        let mut seen = HashSet::new();
        let mut prev_peak = f64::NEG_INFINITY;
        for t in &terms {
            t.triangle.check(&t.label)?;
            if !seen.insert(t.label.as_str()) {
                return Err(FuzzyError::DuplicateTerm(t.label.clone()));
            }
            if t.triangle.b < prev_peak {
                return Err(FuzzyError::UnorderedTerms(t.label.clone()));
            }
            if t.triangle.b < lo || t.triangle.b > hi {
                return Err(FuzzyError::PeakOutsideDomain(t.label.clone()));
            }
            prev_peak = t.triangle.b;
        }
        let p = FuzzyPartition {
            variable_name: variable_name.to_string(),
            terms,
            domain: Interval { lo, hi },
        };
        // Every membership is linear between consecutive breakpoints, so
        // checking the breakpoints and the midpoints between them covers the
        // whole domain.
        for x in p.probe_points() {
            if p.memberships_at(x).iter().all(|&m| m <= 0.0) {
                return Err(FuzzyError::CoverageGap(x));
            }
        }
        if require_ruspini {
            if let Some((at, sum)) = p.ruspini_defect() {
                return Err(FuzzyError::NotRuspini { at, sum });
            }
        }
        Ok(p)
    }

    /// Low = (1, 1, 5.5), Medium = (1, 5.5, 10), High = (5.5, 10, 10) on [1, 10].
    pub fn default_partition() -> Self {
        FuzzyPartition::new(
            CAREER_READINESS,
            vec![
                Term::new("Low", 1.0, 1.0, 5.5),
                Term::new("Medium", 1.0, 5.5, 10.0),
                Term::new("High", 5.5, 10.0, 10.0),
            ],
            (1.0, 10.0),
            true,
        )
        .expect("default partition is valid")
    }

    /// Parses `Label:a,b,c;Label:a,b,c;...`, least ready term first.
    pub fn parse_terms(spec: &str) -> Result<Vec<Term>, FuzzyError> {
        spec.split(';')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|entry| {
                let (label, nums) = entry
                    .split_once(':')
                    .ok_or_else(|| FuzzyError::InvalidSpec(format!("{entry:?} lacks ':'")))?;
                let v: Vec<f64> = nums
                    .split(',')
                    .map(|s| s.trim().parse::<f64>())
                    .collect::<Result<_, _>>()
                    .map_err(|e| FuzzyError::InvalidSpec(format!("{entry:?}: {e}")))?;
                match v[..] {
                    [a, b, c] => Ok(Term::new(label.trim(), a, b, c)),
                    _ => Err(FuzzyError::InvalidSpec(format!("{entry:?} needs three numbers"))),
                }
            })
            .collect()
    }

    pub fn variable_name(&self) -> &str {
        &self.variable_name
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    pub fn labels(&self) -> Vec<String> {
        self.terms.iter().map(|t| t.label.clone()).collect()
    }

    /// Position of a term, accepting aliases.
    pub fn term_index(&self, label: &str) -> Option<usize> {
        let label = canonical_label(label);
        self.terms.iter().position(|t| t.label == label)
    }

    fn memberships_at(&self, x: f64) -> Vec<f64> {
        self.terms.iter().map(|t| t.triangle.membership(x)).collect()
    }

    fn probe_points(&self) -> Vec<f64> {
        let Interval { lo, hi } = self.domain;
        let mut pts: Vec<f64> = self
            .terms
            .iter()
            .flat_map(|t| [t.triangle.a, t.triangle.b, t.triangle.c])
            .chain([lo, hi])
            .filter(|x| (lo..=hi).contains(x))
            .collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        let mids: Vec<f64> = pts.windows(2).map(|w| w[0] + (w[1] - w[0]) / 2.0).collect();
        pts.extend(mids);
        pts.sort_by(f64::total_cmp);
        pts
    }

    /// First probe point where memberships do not sum to 1, if any.
    fn ruspini_defect(&self) -> Option<(f64, f64)> {
        self.probe_points().into_iter().find_map(|x| {
            let s: f64 = self.memberships_at(x).iter().sum();
            ((s - 1.0).abs() > 1e-12).then_some((x, s))
        })
    }

    pub fn is_ruspini(&self) -> bool {
        self.ruspini_defect().is_none()
    }

    pub fn membership(&self, term: &str, x: f64) -> Result<f64, FuzzyError> {
        let i = self
            .term_index(term)
            .ok_or_else(|| FuzzyError::UnknownTerm(term.to_string()))?;
        Ok(self.terms[i].triangle.membership(x))
    }

    /// Clamps `score` to the domain, evaluates every term and picks the
    /// strongest. Equal degrees resolve to the earlier (less ready) term.
    pub fn fuzzify(&self, score: f64) -> Result<LinguisticAssessment, FuzzyError> {
        if score.is_nan() {
            return Err(FuzzyError::NonFinite(score));
        }
        let x = score.clamp(self.domain.lo, self.domain.hi);
        let degrees = self.memberships_at(x);
        let mut best = 0;
        for (i, &d) in degrees.iter().enumerate() {
            if d > degrees[best] {
                best = i;
            }
        }
        Ok(LinguisticAssessment {
            chosen_term: self.terms[best].label.clone(),
            chosen_index: best,
            chosen_degree: degrees[best],
            memberships: self
                .terms
                .iter()
                .zip(degrees)
                .map(|(t, d)| (t.label.clone(), d))
                .collect(),
            raw_score: score,
            input_score: x,
        })
    }

    /// The term's alpha-cut, intersected with the domain.
    pub fn alpha_cut(&self, term: &str, alpha: f64) -> Result<Interval, FuzzyError> {
        let i = self
            .term_index(term)
            .ok_or_else(|| FuzzyError::UnknownTerm(term.to_string()))?;
        let cut = self.terms[i].triangle.alpha_cut(alpha)?;
        Ok(Interval {
            lo: cut.lo.max(self.domain.lo),
            hi: cut.hi.min(self.domain.hi),
        })
    }
}

impl Default for FuzzyPartition {
    fn default() -> Self {
        FuzzyPartition::default_partition()
    }
}

/// A fuzzified verdict for one score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinguisticAssessment {
    pub chosen_term: String,
    /// Position of `chosen_term` in the partition's term order.
    pub chosen_index: usize,
    pub chosen_degree: f64,
    /// Degree of every term, in partition order.
    pub memberships: Vec<(String, f64)>,
    /// Score as given, before clamping.
    pub raw_score: f64,
    /// Score after clamping to the domain.
    pub input_score: f64,
}
