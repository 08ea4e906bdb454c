//! Bopp shifts and representations of the deformed algebra as substitution maps,
//! plus the exact checks run against them.
//!
//! Every check produces [`Claim`]s whose residual is an [`OpExpr`]; a claim
//! passes only when that residual is identically zero. Nothing is truncated.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::symalg::{
    deformed_symbols, flat_nc, heisenberg, AlgebraContext, AlgebraError, OpExpr, Param, ParamScalar,
};

/// Substitution map from the generators of `source` into `target`.
#[derive(Debug, Clone)]
pub struct RepMap {
    name: String,
    source: Arc<AlgebraContext>,
    target: Arc<AlgebraContext>,
    images: BTreeMap<String, OpExpr>,
}

impl RepMap {
    /// Fails unless every source generator has an image living in `target`.
    pub fn new(
        name: &str,
        source: &Arc<AlgebraContext>,
        target: &Arc<AlgebraContext>,
        images: BTreeMap<String, OpExpr>,
    ) -> Result<Self, AlgebraError> {
        for g in source.generators() {
            let image = images
                .get(g)
                .ok_or_else(|| AlgebraError::MissingImage(g.clone()))?;
            if !Arc::ptr_eq(image.context(), target) && **image.context() != **target {
                return Err(AlgebraError::ContextMismatch {
                    left: target.name().to_string(),
                    right: image.context().name().to_string(),
                });
            }
        }
        Ok(RepMap {
            name: name.to_string(),
            source: source.clone(),
            target: target.clone(),
            images,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn source(&self) -> &Arc<AlgebraContext> {
        &self.source
    }

    pub fn target(&self) -> &Arc<AlgebraContext> {
        &self.target
    }

    pub fn image(&self, generator: &str) -> Result<&OpExpr, AlgebraError> {
        self.images
            .get(generator)
            .ok_or_else(|| AlgebraError::MissingImage(generator.to_string()))
    }

    /// Images in source generator order.
    pub fn images(&self) -> impl Iterator<Item = (&str, &OpExpr)> {
        self.source
            .generators()
            .iter()
            .map(|g| (g.as_str(), &self.images[g]))
    }

    /// Image of an arbitrary source expression.
    pub fn apply(&self, expr: &OpExpr) -> Result<OpExpr, AlgebraError> {
        expr.substitute(&self.target, &self.images)
    }

    /// `then ∘ self`: first `self`, then substitute `then`'s images.
    pub fn compose(&self, then: &RepMap, name: &str) -> Result<RepMap, AlgebraError> {
        if *then.source != *self.target {
            return Err(AlgebraError::ContextMismatch {
                left: self.target.name().to_string(),
                right: then.source.name().to_string(),
            });
        }
        let images = self
            .images()
            .map(|(g, e)| Ok((g.to_string(), then.apply(e)?)))
            .collect::<Result<BTreeMap<_, _>, AlgebraError>>()?;
        RepMap::new(name, &self.source, &then.target, images)
    }
}

fn s(num: i64, den: i64) -> ParamScalar {
    ParamScalar::rational(num, den)
}

fn si(num: i64, den: i64) -> ParamScalar {
    ParamScalar::imag(num, den)
}

/// Image or right-hand side as `(coefficient, word)` terms.
type Terms<'a> = &'a [(ParamScalar, &'a [&'a str])];

fn build(
    name: &str,
    source: Arc<AlgebraContext>,
    target: Arc<AlgebraContext>,
    images: &[(&str, Terms)],
) -> RepMap {
    let map = images
        .iter()
        .map(|(g, parts)| {
            (
                g.to_string(),
                OpExpr::sum_of_words(&target, parts).expect("built-in image"),
            )
        })
        .collect();
    RepMap::new(name, &source, &target, map).expect("built-in representation")
}

/// `theta / (den * hbar)` times `num`.
fn theta_over_hbar(num: i64, den: i64) -> ParamScalar {
    s(num, den).times(Param::Theta, 1).times(Param::Hbar, -1)
}

/// Asymmetric shift acting on x: `x0 = x_s - (theta/hbar) p_ys`, `y0 = y_s`.
pub fn bopp_asym_x() -> RepMap {
    build(
        "BOPP_ASYM_X",
        flat_nc(),
        heisenberg(),
        &[
            (
                "x0",
                &[(s(1, 1), &["x_s"]), (theta_over_hbar(-1, 1), &["p_ys"])],
            ),
            ("y0", &[(s(1, 1), &["y_s"])]),
            ("p_x0", &[(s(1, 1), &["p_xs"])]),
            ("p_y0", &[(s(1, 1), &["p_ys"])]),
        ],
    )
}

/// Asymmetric shift acting on y: `x0 = x_s`, `y0 = y_s + (theta/hbar) p_xs`.
pub fn bopp_asym_y() -> RepMap {
    build(
        "BOPP_ASYM_Y",
        flat_nc(),
        heisenberg(),
        &[
            ("x0", &[(s(1, 1), &["x_s"])]),
            (
                "y0",
                &[(s(1, 1), &["y_s"]), (theta_over_hbar(1, 1), &["p_xs"])],
            ),
            ("p_x0", &[(s(1, 1), &["p_xs"])]),
            ("p_y0", &[(s(1, 1), &["p_ys"])]),
        ],
    )
}

/// Symmetric shift: `x0 = x_s - (theta/2hbar) p_ys`, `y0 = y_s + (theta/2hbar) p_xs`.
pub fn bopp_sym() -> RepMap {
    build(
        "BOPP_SYM",
        flat_nc(),
        heisenberg(),
        &[
            (
                "x0",
                &[(s(1, 1), &["x_s"]), (theta_over_hbar(-1, 2), &["p_ys"])],
            ),
            (
                "y0",
                &[(s(1, 1), &["y_s"]), (theta_over_hbar(1, 2), &["p_xs"])],
            ),
            ("p_x0", &[(s(1, 1), &["p_xs"])]),
            ("p_y0", &[(s(1, 1), &["p_ys"])]),
        ],
    )
}

/// Deformed variables in terms of the flat noncommutative ones:
///
/// ```text
/// x   = x0 + i theta tau y0 + tau y0^2 x0
/// y   = y0
/// p_x = p_x0
/// p_y = p_y0 - i hbar tau y0 + tau y0^2 p_y0
/// ```
pub fn rep1() -> RepMap {
    let tau = |c: ParamScalar| c.times(Param::Tau, 1);
    build(
        "REP1",
        deformed_symbols(),
        flat_nc(),
        &[
            (
                "x",
                &[
                    (s(1, 1), &["x0"]),
                    (tau(si(1, 1).times(Param::Theta, 1)), &["y0"]),
                    (tau(s(1, 1)), &["y0", "y0", "x0"]),
                ],
            ),
            ("y", &[(s(1, 1), &["y0"])]),
            ("p_x", &[(s(1, 1), &["p_x0"])]),
            (
                "p_y",
                &[
                    (s(1, 1), &["p_y0"]),
                    (tau(si(-1, 1).times(Param::Hbar, 1)), &["y0"]),
                    (tau(s(1, 1)), &["y0", "y0", "p_y0"]),
                ],
            ),
        ],
    )
}

/// The canonical-variable representation transcribed term by term as printed,
/// word order included.
pub fn rep2_paper() -> RepMap {
    let p = |c: ParamScalar, theta: i32, tau: i32, hbar: i32| {
        c.times(Param::Theta, theta)
            .times(Param::Tau, tau)
            .times(Param::Hbar, hbar)
    };
    build(
        "REP2_PAPER",
        deformed_symbols(),
        heisenberg(),
        &[
            (
                "x",
                &[
                    (s(1, 1), &["x_s"]),
                    (p(s(-1, 2), 1, 0, -1), &["p_ys"]),
                    (p(s(1, 1), 0, 1, 0), &["y_s", "y_s", "x_s"]),
                    (p(si(1, 1), 1, 1, 0), &["y_s"]),
                    (p(s(1, 1), 1, 1, -1), &["y_s", "p_xs", "x_s"]),
                    (p(s(-1, 2), 1, 1, -1), &["y_s", "y_s", "p_ys"]),
                    (p(si(1, 2), 2, 1, -1), &["p_ys"]),
                    (p(s(1, 4), 2, 1, -2), &["p_xs", "p_xs", "x_s"]),
                    (p(s(-1, 2), 2, 1, -2), &["y_s", "p_xs", "p_ys"]),
                    (p(s(-1, 8), 3, 1, -3), &["p_xs", "p_xs", "p_ys"]),
                ],
            ),
            (
                "y",
                &[(s(1, 1), &["y_s"]), (p(s(1, 2), 1, 0, -1), &["p_xs"])],
            ),
            ("p_x", &[(s(1, 1), &["p_xs"])]),
            (
                "p_y",
                &[
                    (s(1, 1), &["p_ys"]),
                    (p(si(-1, 1), 0, 1, 1), &["y_s"]),
                    (p(s(1, 1), 0, 1, 0), &["y_s", "y_s", "p_ys"]),
                    (p(si(-1, 2), 1, 1, 0), &["p_xs"]),
                    (p(s(1, 1), 1, 1, -1), &["y_s", "p_xs", "p_ys"]),
                    (p(s(1, 4), 2, 1, -2), &["p_xs", "p_xs", "p_ys"]),
                ],
            ),
        ],
    )
}

/// [`rep1`] followed by [`bopp_sym`], multiplied out by the engine.
pub fn rep2_composed() -> RepMap {
    rep1()
        .compose(&bopp_sym(), "REP2_COMPOSED")
        .expect("REP1 lands in FLAT_NC")
}

/// A commutation relation `[left, right] = rhs`, `rhs` in the same algebra as the generators.
#[derive(Debug, Clone)]
pub struct Relation {
    pub left: String,
    pub right: String,
    pub rhs: OpExpr,
}

fn relations(ctx: &Arc<AlgebraContext>, table: &[(&str, &str, Terms)]) -> Vec<Relation> {
    table
        .iter()
        .map(|(l, r, parts)| Relation {
            left: l.to_string(),
            right: r.to_string(),
            rhs: OpExpr::sum_of_words(ctx, parts).expect("built-in relation"),
        })
        .collect()
}

fn ih() -> ParamScalar {
    ParamScalar::i().times(Param::Hbar, 1)
}

/// The six canonical brackets.
pub fn heisenberg_relations() -> Vec<Relation> {
    relations(
        &heisenberg(),
        &[
            ("x_s", "y_s", &[]),
            ("x_s", "p_xs", &[(ih(), &[])]),
            ("y_s", "p_ys", &[(ih(), &[])]),
            ("p_xs", "p_ys", &[]),
            ("x_s", "p_ys", &[]),
            ("y_s", "p_xs", &[]),
        ],
    )
}

/// The six flat noncommutative brackets, `[x0, y0] = i theta`.
pub fn flat_nc_relations() -> Vec<Relation> {
    relations(
        &flat_nc(),
        &[
            ("x0", "y0", &[(si(1, 1).times(Param::Theta, 1), &[])]),
            ("x0", "p_x0", &[(ih(), &[])]),
            ("y0", "p_y0", &[(ih(), &[])]),
            ("p_x0", "p_y0", &[]),
            ("x0", "p_y0", &[]),
            ("y0", "p_x0", &[]),
        ],
    )
}

/// The position-dependent brackets, right-hand sides in the deformed variables:
///
/// ```text
/// [x, y]   = i theta (1 + tau y^2)
/// [x, p_x] = i hbar (1 + tau y^2)
/// [y, p_y] = i hbar (1 + tau y^2)
/// [p_x, p_y] = 0
/// [x, p_y] = 2 i tau y (theta p_y + hbar x)
/// [y, p_x] = 0
/// ```
pub fn deformed_relations() -> Vec<Relation> {
    let it = si(1, 1).times(Param::Theta, 1);
    let tau = |c: &ParamScalar| c.clone().times(Param::Tau, 1);
    relations(
        &deformed_symbols(),
        &[
            ("x", "y", &[(it.clone(), &[]), (tau(&it), &["y", "y"])]),
            ("x", "p_x", &[(ih(), &[]), (tau(&ih()), &["y", "y"])]),
            ("y", "p_y", &[(ih(), &[]), (tau(&ih()), &["y", "y"])]),
            ("p_x", "p_y", &[]),
            (
                "x",
                "p_y",
                &[
                    (tau(&si(2, 1).times(Param::Theta, 1)), &["y", "p_y"]),
                    (tau(&si(2, 1).times(Param::Hbar, 1)), &["y", "x"]),
                ],
            ),
            ("y", "p_x", &[]),
        ],
    )
}

/// One checked statement. `passed` iff `residual` is identically zero.
#[derive(Debug, Clone)]
pub struct Claim {
    pub label: String,
    pub expected: OpExpr,
    pub computed: OpExpr,
    pub residual: OpExpr,
    pub passed: bool,
}

impl Claim {
    fn new(label: String, expected: OpExpr, computed: OpExpr) -> Result<Claim, AlgebraError> {
        let residual = computed.sub(&expected)?;
        Ok(Claim {
            label,
            passed: residual.is_zero(),
            expected,
            computed,
            residual,
        })
    }
}

#[derive(Debug, Clone)]
pub struct VerificationReport {
    pub title: String,
    pub claims: Vec<Claim>,
}

impl VerificationReport {
    pub fn all_passed(&self) -> bool {
        self.claims.iter().all(|c| c.passed)
    }

    pub fn claim(&self, label: &str) -> Option<&Claim> {
        self.claims.iter().find(|c| c.label == label)
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.title)?;
        for c in &self.claims {
            writeln!(
                f,
                "  {:<32} {}  residual: {}",
                c.label,
                if c.passed { "PASS" } else { "FAIL" },
                c.residual
            )?;
        }
        Ok(())
    }
}

/// Checks `[image(l), image(r)] == image(rhs)` for every relation.
pub fn verify_algebra(
    rep: &RepMap,
    expected: &[Relation],
) -> Result<VerificationReport, AlgebraError> {
    let mut claims = Vec::with_capacity(expected.len());
    for rel in expected {
        let computed = rep.image(&rel.left)?.commutator(rep.image(&rel.right)?)?;
        let target_rhs = rep.apply(&rel.rhs)?;
        claims.push(Claim::new(
            format!("[{}, {}]", rel.left, rel.right),
            target_rhs,
            computed,
        )?);
    }
    Ok(VerificationReport {
        title: format!("{}: commutation relations", rep.name),
        claims,
    })
}

/// Residual `adjoint(image) - image` for every generator image.
pub fn verify_hermiticity(rep: &RepMap) -> Result<VerificationReport, AlgebraError> {
    let mut claims = Vec::new();
    for (g, image) in rep.images() {
        claims.push(Claim::new(
            format!("{g}^dagger = {g}"),
            image.clone(),
            image.adjoint()?,
        )?);
    }
    Ok(VerificationReport {
        title: format!("{}: hermiticity", rep.name),
        claims,
    })
}

fn jacobi_claims(named: &[(String, OpExpr)]) -> Result<Vec<Claim>, AlgebraError> {
    let mut claims = Vec::new();
    let n = named.len();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let (na, a) = &named[i];
                let (nb, b) = &named[j];
                let (nc, c) = &named[k];
                let sum = a
                    .commutator(&b.commutator(c)?)?
                    .add(&b.commutator(&c.commutator(a)?)?)?
                    .add(&c.commutator(&a.commutator(b)?)?)?;
                claims.push(Claim::new(
                    format!("Jacobi({na}, {nb}, {nc})"),
                    OpExpr::zero(a.context()),
                    sum,
                )?);
            }
        }
    }
    Ok(claims)
}

/// Cyclic commutator sums over all generator triples of a context.
pub fn verify_jacobi_context(
    ctx: &Arc<AlgebraContext>,
) -> Result<VerificationReport, AlgebraError> {
    let named = ctx
        .generators()
        .iter()
        .map(|g| Ok((g.clone(), OpExpr::generator(ctx, g)?)))
        .collect::<Result<Vec<_>, AlgebraError>>()?;
    Ok(VerificationReport {
        title: format!("{}: Jacobi identity", ctx.name()),
        claims: jacobi_claims(&named)?,
    })
}

/// Cyclic commutator sums over all triples of image operators.
pub fn verify_jacobi_rep(rep: &RepMap) -> Result<VerificationReport, AlgebraError> {
    let named: Vec<(String, OpExpr)> = rep
        .images()
        .map(|(g, e)| (g.to_string(), e.clone()))
        .collect();
    Ok(VerificationReport {
        title: format!("{}: Jacobi identity of images", rep.name),
        claims: jacobi_claims(&named)?,
    })
}

/// Per-generator residual `a.image - b.image`.
pub fn compare_reps(a: &RepMap, b: &RepMap) -> Result<VerificationReport, AlgebraError> {
    if *a.source != *b.source || *a.target != *b.target {
        return Err(AlgebraError::ContextMismatch {
            left: format!("{} -> {}", a.source.name(), a.target.name()),
            right: format!("{} -> {}", b.source.name(), b.target.name()),
        });
    }
    let mut claims = Vec::new();
    for (g, image) in a.images() {
        claims.push(Claim::new(
            format!("{g}: {} vs {}", a.name, b.name),
            b.image(g)?.clone(),
            image.clone(),
        )?);
    }
    Ok(VerificationReport {
        title: format!("{} vs {}", a.name, b.name),
        claims,
    })
}

/// Which verification sections to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    All,
    Bopp,
    Rep1,
    Rep2,
    Jacobi,
    Hermiticity,
}

/// A report plus whether its failure should fail the run.
#[derive(Debug, Clone)]
pub struct SuiteSection {
    pub must_pass: bool,
    pub report: VerificationReport,
}

/// Builds the requested sections in a fixed order.
///
/// The printed representation is only ever compared and reported; all other
/// sections must pass.
pub fn run_suite(suite: Suite) -> Result<Vec<SuiteSection>, AlgebraError> {
    let wants = |s: Suite| suite == Suite::All || suite == s;
    let must = |report| SuiteSection {
        must_pass: true,
        report,
    };
    let info = |report| SuiteSection {
        must_pass: false,
        report,
    };
    let mut out = Vec::new();

    if wants(Suite::Bopp) {
        for rep in [bopp_asym_x(), bopp_asym_y(), bopp_sym()] {
            out.push(must(verify_algebra(&rep, &flat_nc_relations())?));
        }
    }
    if wants(Suite::Rep1) {
        out.push(must(verify_algebra(&rep1(), &deformed_relations())?));
    }
    if wants(Suite::Rep2) {
        let composed = rep2_composed();
        let printed = rep2_paper();
        out.push(must(verify_algebra(&composed, &deformed_relations())?));
        out.push(info(verify_algebra(&printed, &deformed_relations())?));
        out.push(info(compare_reps(&composed, &printed)?));
    }
    if wants(Suite::Jacobi) {
        out.push(must(verify_jacobi_context(&heisenberg())?));
        out.push(must(verify_jacobi_context(&flat_nc())?));
        out.push(must(verify_jacobi_rep(&rep1())?));
        out.push(must(verify_jacobi_rep(&rep2_composed())?));
    }
    if wants(Suite::Hermiticity) {
        out.push(must(verify_hermiticity(&bopp_sym())?));
        out.push(must(verify_hermiticity(&rep1())?));
        out.push(must(verify_hermiticity(&rep2_composed())?));
        out.push(info(verify_hermiticity(&rep2_paper())?));
    }
    Ok(out)
}
