//! Pre-solenoids presented as edge substitutions on a rose.
//!
//! A rose is a single vertex with loop edges. Each edge `e` is an isometric
//! copy of `[0, 1]`, and the map `g` wraps `e` around the edges of its image
//! word in order, each letter receiving an equal share of `e`.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use solenoidk_abelian::IntMatrix;
use thiserror::Error;

use crate::poly::{self, characteristic_polynomial, ln_enclosure, Poly, SturmChain, Q};

pub type EdgeId = usize;
pub type Word = Vec<EdgeId>;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct EdgeLabel(String);

impl EdgeLabel {
    pub fn new(name: impl Into<String>) -> Self {
        EdgeLabel(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for EdgeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    Preserving,
    Reversing,
}

/// Malformed input that cannot even be represented as a substitution.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SystemError {
    #[error("a rose needs at least one edge")]
    NoEdges,
    #[error("edge labels must be nonempty")]
    EmptyLabel,
    #[error("edge label {0} declared twice")]
    DuplicateLabel(String),
    #[error("unknown edge {0}")]
    UnknownEdge(String),
    #[error("edge {0} has no image word")]
    MissingImage(String),
    #[error("edge {0} has more than one image word")]
    DuplicateImage(String),
}

/// A violated structural condition; each names the offending edge.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "edge")]
pub enum Violation {
    EmptyImage(EdgeLabel),
    NonSurjective(EdgeLabel),
    NonExpanding(EdgeLabel),
    OrientationReversing,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyImage(e) => write!(f, "EmptyImage({e})"),
            Violation::NonSurjective(e) => write!(f, "NonSurjective({e})"),
            Violation::NonExpanding(e) => write!(f, "NonExpanding({e})"),
            Violation::OrientationReversing => write!(f, "OrientationReversing"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EntropyError {
    #[error("requested enclosure width {0} is below the supported bound 2^-{MAX_WIDTH_BITS}")]
    PrecisionUnreachable(String),
    #[error("substitution matrix has spectral radius at most 1")]
    NotExpanding,
}

/// Smallest supported entropy enclosure width is `2^-MAX_WIDTH_BITS`.
pub const MAX_WIDTH_BITS: u32 = 1000;

/// Certified enclosures of the Perron eigenvalue and of its logarithm.
#[derive(Clone, Debug, Serialize)]
pub struct Entropy {
    #[serde(serialize_with = "ser_q_pair")]
    pub lambda: (Q, Q),
    #[serde(serialize_with = "ser_q_pair")]
    pub log_lambda: (Q, Q),
    /// Characteristic polynomial of the substitution matrix, constant term first.
    #[serde(serialize_with = "ser_ints")]
    pub char_poly: Vec<BigInt>,
    /// Decimal digits shared by both ends of `log_lambda`, hence certified.
    pub decimal: String,
}

fn ser_q_pair<S: serde::Serializer>(p: &(Q, Q), s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeTuple;
    let mut t = s.serialize_tuple(2)?;
    t.serialize_element(&p.0.to_string())?;
    t.serialize_element(&p.1.to_string())?;
    t.end()
}

fn ser_ints<S: serde::Serializer>(v: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
    let vals: Vec<solenoidk_abelian::IntValue> =
        v.iter().cloned().map(solenoidk_abelian::IntValue).collect();
    vals.serialize(s)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubstitutionSystem {
    labels: Vec<EdgeLabel>,
    images: Vec<Word>,
    orientation: Orientation,
}

impl SubstitutionSystem {
    /// `images[i]` is the image word of `labels[i]`.
    pub fn new(
        labels: Vec<EdgeLabel>,
        images: Vec<Word>,
        orientation: Orientation,
    ) -> Result<Self, SystemError> {
        if labels.is_empty() {
            return Err(SystemError::NoEdges);
        }
        let mut seen = BTreeSet::new();
        for l in &labels {
            if l.0.is_empty() {
                return Err(SystemError::EmptyLabel);
            }
            if !seen.insert(l.clone()) {
                return Err(SystemError::DuplicateLabel(l.0.clone()));
            }
        }
        if images.len() != labels.len() {
            let missing = labels
                .get(images.len())
                .map_or_else(String::new, |l| l.0.clone());
            return Err(SystemError::MissingImage(missing));
        }
        if let Some(&bad) = images.iter().flatten().find(|&&e| e >= labels.len()) {
            return Err(SystemError::UnknownEdge(format!("#{bad}")));
        }
        Ok(SubstitutionSystem {
            labels,
            images,
            orientation,
        })
    }

    /// Builds a system from edge names and `(edge, word)` rules. Words are
    /// tokenized on whitespace when they contain any, otherwise by longest
    /// matching edge name.
    pub fn from_rules(edges: &[&str], rules: &[(&str, &str)]) -> Result<Self, SystemError> {
        let labels: Vec<EdgeLabel> = edges.iter().map(|e| EdgeLabel::new(*e)).collect();
        let mut images: Vec<Option<Word>> = vec![None; labels.len()];
        for (edge, word) in rules {
            let idx = labels
                .iter()
                .position(|l| l.0 == *edge)
                .ok_or_else(|| SystemError::UnknownEdge(edge.to_string()))?;
            if images[idx].is_some() {
                return Err(SystemError::DuplicateImage(edge.to_string()));
            }
            images[idx] = Some(tokenize(&labels, word)?);
        }
        let images = images
            .into_iter()
            .zip(&labels)
            .map(|(w, l)| w.ok_or_else(|| SystemError::MissingImage(l.0.clone())))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(labels, images, Orientation::Preserving)
    }

    pub fn with_orientation(mut self, orientation: Orientation) -> Self {
        self.orientation = orientation;
        self
    }

    pub fn edge_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edges(&self) -> impl Iterator<Item = EdgeId> {
        0..self.labels.len()
    }

    pub fn labels(&self) -> &[EdgeLabel] {
        &self.labels
    }

    pub fn label(&self, e: EdgeId) -> &EdgeLabel {
        &self.labels[e]
    }

    pub fn edge_by_name(&self, name: &str) -> Option<EdgeId> {
        self.labels.iter().position(|l| l.0 == name)
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn image(&self, e: EdgeId) -> &[EdgeId] {
        &self.images[e]
    }

    pub fn first_letter(&self, e: EdgeId) -> EdgeId {
        self.images[e][0]
    }

    pub fn last_letter(&self, e: EdgeId) -> EdgeId {
        *self.images[e].last().expect("validated image is nonempty")
    }

    /// Renders a word by concatenating labels (space separated when any
    /// label is longer than one character).
    pub fn render(&self, word: &[EdgeId]) -> String {
        let sep = if self.labels.iter().any(|l| l.0.chars().count() > 1) {
            " "
        } else {
            ""
        };
        word.iter()
            .map(|&e| self.labels[e].0.as_str())
            .collect::<Vec<_>>()
            .join(sep)
    }

    /// Symbolic necessary conditions: nonempty images, surjectivity, and
    /// eventual expansion. Passing is not a certificate for the metric axioms.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        if self.orientation == Orientation::Reversing {
            violations.push(Violation::OrientationReversing);
        }
        for e in self.edges() {
            if self.images[e].is_empty() {
                violations.push(Violation::EmptyImage(self.labels[e].clone()));
            }
        }
        let used: BTreeSet<EdgeId> = self.images.iter().flatten().copied().collect();
        for e in self.edges() {
            if !used.contains(&e) {
                violations.push(Violation::NonSurjective(self.labels[e].clone()));
            }
        }
        if violations
            .iter()
            .any(|v| matches!(v, Violation::EmptyImage(_)))
        {
            return ValidationReport { violations };
        }

        let lengths = self.growth_table(self.edge_count());
        let mut all_grow = true;
        for e in self.edges() {
            if !lengths.iter().any(|row| row[e] >= BigInt::from(2)) {
                violations.push(Violation::NonExpanding(self.labels[e].clone()));
                all_grow = false;
            }
        }
        if all_grow && !self.spectral_radius_exceeds_one() {
            violations.push(Violation::NonExpanding(self.labels[0].clone()));
        }
        ValidationReport { violations }
    }

    /// `table[n-1][e] = |gⁿ(e)|` for `n = 1..=steps`.
    fn growth_table(&self, steps: usize) -> Vec<Vec<BigInt>> {
        let m = self.substitution_matrix();
        let mut lengths: Vec<BigInt> = vec![BigInt::one(); self.edge_count()];
        let mut out = Vec::with_capacity(steps);
        for _ in 0..steps {
            // |g(w)| = Σ_f occ(f, w)·|g(f)|, i.e. row vector times M
            lengths = self
                .edges()
                .map(|col| self.edges().map(|row| &lengths[row] * &m[(row, col)]).sum())
                .collect();
            out.push(lengths.clone());
        }
        out
    }

    fn spectral_radius_exceeds_one(&self) -> bool {
        let cp = characteristic_polynomial(&self.substitution_matrix());
        SturmChain::new(&Poly::from_ints(&cp)).roots_above(&Q::one()) > 0
    }

    /// `M[e][f]` = number of occurrences of `e` in `g(f)`.
    pub fn substitution_matrix(&self) -> IntMatrix {
        let n = self.edge_count();
        let mut m = IntMatrix::zeros(n, n);
        for (f, word) in self.images.iter().enumerate() {
            for &e in word {
                m[(e, f)] += 1;
            }
        }
        m
    }

    /// `gⁿ(e)`, substituting letter by letter `n` times.
    pub fn iterate_word(&self, e: EdgeId, n: usize) -> Word {
        let mut w = vec![e];
        for _ in 0..n {
            w = self.substitute(&w);
        }
        w
    }

    /// Applies `g` once to every letter of `w`.
    pub fn substitute(&self, w: &[EdgeId]) -> Word {
        w.iter()
            .flat_map(|&x| self.images[x].iter().copied())
            .collect()
    }

    /// `last(gⁿ(e))` and `first(gⁿ(e))` without building the word.
    pub fn last_letter_iter(&self, e: EdgeId, n: usize) -> EdgeId {
        (0..n).fold(e, |x, _| self.last_letter(x))
    }

    pub fn first_letter_iter(&self, e: EdgeId, n: usize) -> EdgeId {
        (0..n).fold(e, |x, _| self.first_letter(x))
    }

    /// Primitivity of `M`: some power with `n ≤ (d−1)² + 1` is entrywise positive.
    pub fn is_mixing(&self) -> bool {
        let d = self.edge_count();
        let bound = (d - 1) * (d - 1) + 1;
        let base: Vec<Vec<bool>> = {
            let m = self.substitution_matrix();
            (0..d)
                .map(|i| (0..d).map(|j| !m[(i, j)].is_zero()).collect())
                .collect()
        };
        let mut power = base.clone();
        for _ in 0..bound {
            if power.iter().flatten().all(|&x| x) {
                return true;
            }
            power = bool_product(&power, &base);
        }
        false
    }

    /// Topological entropy `log λ` with `λ` the Perron eigenvalue of `M`,
    /// enclosed in rational intervals whose widths are at most `width`.
    pub fn entropy(&self, width: &Q) -> Result<Entropy, EntropyError> {
        let min_width = Q::new(BigInt::one(), BigInt::one() << MAX_WIDTH_BITS);
        if !width.is_positive() || width < &min_width {
            return Err(EntropyError::PrecisionUnreachable(width.to_string()));
        }
        let m = self.substitution_matrix();
        let cp = characteristic_polynomial(&m);
        let sturm = SturmChain::new(&Poly::from_ints(&cp));

        // Perron root is the largest real root; column sums bound it above.
        let col_max = (0..m.cols())
            .map(|j| (0..m.rows()).map(|i| m[(i, j)].clone()).sum::<BigInt>())
            .max()
            .unwrap_or_else(BigInt::zero);
        let mut hi = Q::from_integer(col_max + 1);
        let mut lo = Q::one();
        if sturm.roots_above(&lo) == 0 {
            return Err(EntropyError::NotExpanding);
        }
        let two = Q::from_integer(BigInt::from(2));
        let log;
        loop {
            // λ ∈ (lo, hi]; stop once λ is isolated and the log interval is tight
            if sturm.roots_above(&lo) == 1 {
                let lo_log = ln_enclosure(&lo, &(width / &two)).0;
                let hi_log = ln_enclosure(&hi, &(width / &two)).1;
                if &(&hi_log - &lo_log) <= width {
                    log = (lo_log, hi_log);
                    break;
                }
            }
            let mid = (&lo + &hi) / &two;
            if sturm.roots_above(&mid) >= 1 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let decimal = poly::common_decimal(&log.0, &log.1);
        Ok(Entropy {
            lambda: (lo, hi),
            log_lambda: log,
            char_poly: cp,
            decimal,
        })
    }
}

impl Entropy {
    /// Sign-change certificate: the square-free characteristic polynomial
    /// changes sign (or vanishes) across the eigenvalue enclosure.
    pub fn certified_by_sign_change(&self) -> bool {
        let sf = Poly::from_ints(&self.char_poly).square_free();
        let a = sf.eval(&self.lambda.0);
        let b = sf.eval(&self.lambda.1);
        (a * b) <= Q::zero()
    }
}

fn bool_product(a: &[Vec<bool>], b: &[Vec<bool>]) -> Vec<Vec<bool>> {
    let n = a.len();
    (0..n)
        .map(|i| (0..n).map(|j| (0..n).any(|k| a[i][k] && b[k][j])).collect())
        .collect()
}

fn tokenize(labels: &[EdgeLabel], word: &str) -> Result<Word, SystemError> {
    let find = |tok: &str| {
        labels
            .iter()
            .position(|l| l.0 == tok)
            .ok_or_else(|| SystemError::UnknownEdge(tok.to_string()))
    };
    if word.chars().any(char::is_whitespace) {
        return word.split_whitespace().map(find).collect();
    }
    let mut out = Vec::new();
    let mut rest = word;
    while !rest.is_empty() {
        let best = labels
            .iter()
            .enumerate()
            .filter(|(_, l)| rest.starts_with(l.0.as_str()))
            .max_by_key(|(_, l)| l.0.len());
        match best {
            Some((i, l)) => {
                out.push(i);
                rest = &rest[l.0.len()..];
            }
            None => {
                let c = rest.chars().next().unwrap();
                return Err(SystemError::UnknownEdge(c.to_string()));
            }
        }
    }
    Ok(out)
}

/// Helper for exact rationals from small integers.
pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}
