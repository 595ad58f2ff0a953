use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::groupalg::{c_of, AlgebraElement, AlgebraSpec, Word};
use crate::linalg::{ldl_psd, Matrix};
use crate::scalar::creal;
use crate::{CQMatrix, CRational, Rational};

/// Column convention of a Gram basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Columns are words.
    Full,
    /// Columns are `c(g) = g − 1`, so every square lies in `ω(Γ)`.
    Augmentation,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Full => "full",
            Mode::Augmentation => "augmentation",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(Mode::Full),
            "augmentation" => Ok(Mode::Augmentation),
            _ => Err(Error::Parse(format!("unknown mode {s:?}"))),
        }
    }

    /// The algebra element standing for a basis word.
    pub fn column(&self, spec: &Arc<AlgebraSpec>, w: &Word) -> AlgebraElement {
        match self {
            Mode::Full => AlgebraElement::word(spec, w.clone()),
            Mode::Augmentation => c_of(spec, w),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ResidualPolicy {
    Exact,
    /// `amount · by` is added to the sum of squares.
    Absorbed { by: AlgebraElement, amount: Rational },
}

/// `Σ w_i a_i* a_i (+ absorption) = target`, checkable exactly.
#[derive(Clone, Debug, PartialEq)]
pub struct SosCertificate {
    pub target: AlgebraElement,
    pub squares: Vec<(Rational, AlgebraElement)>,
    pub residual: ResidualPolicy,
    pub mode: Mode,
}

impl SosCertificate {
    pub fn new(target: AlgebraElement, mode: Mode) -> Self {
        SosCertificate {
            target,
            squares: Vec::new(),
            residual: ResidualPolicy::Exact,
            mode,
        }
    }

    pub fn push(&mut self, weight: Rational, a: AlgebraElement) {
        if !weight.is_zero() && !a.is_zero() {
            self.squares.push((weight, a));
        }
    }

    /// `Σ w_i a_i* a_i` plus the absorption term.
    pub fn sum(&self) -> Result<AlgebraElement> {
        let mut total = AlgebraElement::zero(self.target.spec());
        for (w, a) in &self.squares {
            let sq = a.involution().multiply(a)?;
            total = total.try_add(&sq.scale(w))?;
        }
        if let ResidualPolicy::Absorbed { by, amount } = &self.residual {
            total = total.try_add(&by.scale(amount))?;
        }
        Ok(total)
    }

    /// Multiplies all weights and the target by `s ≥ 0`.
    pub fn scaled(&self, s: &Rational) -> Self {
        let mut out = SosCertificate::new(self.target.scale(s), self.mode);
        for (w, a) in &self.squares {
            out.push(w * s, a.clone());
        }
        if let ResidualPolicy::Absorbed { by, amount } = &self.residual {
            out.residual = ResidualPolicy::Absorbed {
                by: by.clone(),
                amount: amount * s,
            };
        }
        out
    }

    /// Concatenates two certificates for the same backend; targets add.
    pub fn combine(&self, other: &Self) -> Result<Self> {
        let mode = if self.mode == Mode::Augmentation && other.mode == Mode::Augmentation {
            Mode::Augmentation
        } else {
            Mode::Full
        };
        let mut out = SosCertificate::new(self.target.try_add(&other.target)?, mode);
        out.squares = self.squares.iter().chain(&other.squares).cloned().collect();
        out.residual = match (&self.residual, &other.residual) {
            (ResidualPolicy::Exact, r) | (r, ResidualPolicy::Exact) => r.clone(),
            _ => return Err(Error::Precondition("two absorption terms".into())),
        };
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyReport {
    pub ok: bool,
    pub problem: Option<String>,
}

pub fn verify_certificate(cert: &SosCertificate) -> bool {
    verify_certificate_report(cert).ok
}

pub fn verify_certificate_report(cert: &SosCertificate) -> VerifyReport {
    let fail = |m: String| VerifyReport {
        ok: false,
        problem: Some(m),
    };
    for (i, (w, a)) in cert.squares.iter().enumerate() {
        if !w.is_positive() {
            return fail(format!("square {i} has nonpositive weight"));
        }
        if a.spec() != cert.target.spec() {
            return fail(format!("square {i} lives in a different algebra"));
        }
        if cert.mode == Mode::Augmentation && !a.augmentation().is_zero() {
            return fail(format!("square {i} is not in the augmentation ideal"));
        }
    }
    if let ResidualPolicy::Absorbed { amount, .. } = &cert.residual {
        if amount.is_negative() {
            return fail("negative absorption amount".into());
        }
    }
    let total = match cert.sum() {
        Ok(t) => t,
        Err(e) => return fail(e.to_string()),
    };
    let spec = cert.target.spec();
    let diff = match total.try_sub(&cert.target) {
        Ok(d) => d,
        Err(e) => return fail(e.to_string()),
    };
    if let Some((w, c)) = diff.terms().iter().next() {
        return fail(format!(
            "coefficient mismatch at word {:?}: sum minus target is {} + {}i",
            spec.format_word(w),
            c.re,
            c.im
        ));
    }
    VerifyReport {
        ok: true,
        problem: None,
    }
}

/// A linear functional on words, positive on the Gram cone of `basis`, with
/// `φ(target) < 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct DualWitness {
    pub spec: Arc<AlgebraSpec>,
    pub mode: Mode,
    pub basis: Vec<Word>,
    pub functional: BTreeMap<Word, CRational>,
    pub moment_matrix: CQMatrix,
    pub value_at_target: Rational,
}

impl DualWitness {
    /// Builds the witness from functional values, computing the moment
    /// matrix `φ(e_i* e_j)` and `φ(target)`.
    pub fn new(
        spec: &Arc<AlgebraSpec>,
        mode: Mode,
        basis: Vec<Word>,
        functional: BTreeMap<Word, CRational>,
        target: &AlgebraElement,
    ) -> Result<Self> {
        let moment = moment_matrix(spec, mode, &basis, &functional)?;
        let value = apply(&functional, target).re;
        Ok(DualWitness {
            spec: spec.clone(),
            mode,
            basis,
            functional,
            moment_matrix: moment,
            value_at_target: value,
        })
    }

    pub fn value(&self, a: &AlgebraElement) -> CRational {
        apply(&self.functional, a)
    }

    /// Exact re-check: moment matrix PSD and `φ(target) < 0`.
    pub fn verify(&self, target: &AlgebraElement) -> bool {
        let Ok(m) = moment_matrix(&self.spec, self.mode, &self.basis, &self.functional) else {
            return false;
        };
        m == self.moment_matrix
            && m.is_hermitian()
            && ldl_psd(&m).is_some()
            && apply(&self.functional, target).re == self.value_at_target
            && self.value_at_target.is_negative()
    }
}

/// `φ(a) = Σ a_w φ(w)`; words outside the table count as 0.
pub fn apply(functional: &BTreeMap<Word, CRational>, a: &AlgebraElement) -> CRational {
    a.terms()
        .iter()
        .filter_map(|(w, c)| functional.get(w).map(|v| c * v))
        .fold(creal(Rational::zero()), |acc, x| acc + x)
}

pub fn moment_matrix(
    spec: &Arc<AlgebraSpec>,
    mode: Mode,
    basis: &[Word],
    functional: &BTreeMap<Word, CRational>,
) -> Result<CQMatrix> {
    let cols: Vec<AlgebraElement> = basis.iter().map(|w| mode.column(spec, w)).collect();
    let n = cols.len();
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        let ci = cols[i].involution();
        for j in 0..n {
            m[(i, j)] = apply(functional, &ci.multiply(&cols[j])?);
        }
    }
    Ok(m)
}
