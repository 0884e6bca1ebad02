//! Truncated power series and series solutions of rational ODE systems.
//!
//! The membership oracle wants Taylor coefficients of model trajectories at
//! generic points, exactly, in whatever field the trial runs in. The solver
//! here works term by term: every monomial that appears in the model is a
//! node of a shared product DAG whose coefficients are extended one order
//! at a time, and the reciprocal of the common denominator Q is maintained
//! as a series alongside, so each new order costs one convolution step per
//! node. The same DAG powers batch evaluation of polynomials at a point,
//! where a monomial shared by many polynomials is multiplied out once.

use std::collections::{BTreeMap, HashMap};

use crate::coeff::FieldCtx;
use crate::error::{Error, Result};
use crate::model::Model;
use crate::mono::Mono;
use crate::poly::MultiPoly;

/// A power series known up to, but not including, order `precision()`.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedSeries<F: FieldCtx> {
    field: F,
    coeffs: Vec<F::Elem>,
}

impl<F: FieldCtx> TruncatedSeries<F> {
    pub fn new(field: F, coeffs: Vec<F::Elem>) -> Self {
        TruncatedSeries { field, coeffs }
    }

    pub fn zero(field: F, precision: usize) -> Self {
        let coeffs = (0..precision).map(|_| field.zero()).collect();
        TruncatedSeries { field, coeffs }
    }

    pub fn constant(field: F, c: F::Elem, precision: usize) -> Self {
        let mut s = Self::zero(field, precision);
        if precision > 0 {
            s.coeffs[0] = c;
        }
        s
    }

    pub fn field(&self) -> &F {
        &self.field
    }

    /// Number of known coefficients.
    pub fn precision(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeff(&self, k: usize) -> &F::Elem {
        &self.coeffs[k]
    }

    pub fn coeffs(&self) -> &[F::Elem] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| self.field.is_zero(c))
    }

    pub fn truncate(&self, precision: usize) -> Self {
        let n = precision.min(self.coeffs.len());
        TruncatedSeries { field: self.field.clone(), coeffs: self.coeffs[..n].to_vec() }
    }

    /// Arithmetic keeps the smaller precision of the two operands.
    pub fn add(&self, other: &Self) -> Self {
        let n = self.precision().min(other.precision());
        let coeffs =
            (0..n).map(|k| self.field.add(&self.coeffs[k], &other.coeffs[k])).collect();
        TruncatedSeries { field: self.field.clone(), coeffs }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.precision().min(other.precision());
        let coeffs =
            (0..n).map(|k| self.field.sub(&self.coeffs[k], &other.coeffs[k])).collect();
        TruncatedSeries { field: self.field.clone(), coeffs }
    }

    pub fn scale(&self, c: &F::Elem) -> Self {
        let coeffs = self.coeffs.iter().map(|a| self.field.mul(a, c)).collect();
        TruncatedSeries { field: self.field.clone(), coeffs }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let n = self.precision().min(other.precision());
        let f = &self.field;
        let mut coeffs = vec![f.zero(); n];
        for (i, a) in self.coeffs.iter().take(n).enumerate() {
            if f.is_zero(a) {
                continue;
            }
            for (j, b) in other.coeffs.iter().take(n - i).enumerate() {
                coeffs[i + j] = f.add(&coeffs[i + j], &f.mul(a, b));
            }
        }
        TruncatedSeries { field: f.clone(), coeffs }
    }

    /// Multiplicative inverse; the constant term must be invertible.
    pub fn inverse(&self) -> Result<Self> {
        let f = &self.field;
        if self.coeffs.is_empty() {
            return Err(Error::usage("cannot invert a series of precision 0"));
        }
        let r0 = f
            .inv(&self.coeffs[0])
            .ok_or_else(|| Error::usage("series inverse needs an invertible constant term"))?;
        let n = self.precision();
        let mut inv = Vec::with_capacity(n);
        inv.push(r0.clone());
        for k in 1..n {
            // sum_{i=1..k} a_i * r_{k-i}, then r_k = -r_0 * sum.
            let mut acc = f.zero();
            for i in 1..=k {
                acc = f.add(&acc, &f.mul(&self.coeffs[i], &inv[k - i]));
            }
            inv.push(f.neg(&f.mul(&r0, &acc)));
        }
        Ok(TruncatedSeries { field: f.clone(), coeffs: inv })
    }

    /// Termwise derivative; precision drops by one.
    pub fn derivative(&self) -> Self {
        let f = &self.field;
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| f.mul(c, &f.from_i64(k as i64)))
            .collect();
        TruncatedSeries { field: f.clone(), coeffs }
    }

    /// Value of the k-th derivative at 0, i.e. k! times coefficient k.
    pub fn derivative_value(&self, k: usize) -> F::Elem {
        let f = &self.field;
        let mut fact = f.one();
        for i in 2..=k as i64 {
            fact = f.mul(&fact, &f.from_i64(i));
        }
        f.mul(&fact, &self.coeffs[k])
    }
}

/// Shared-product plan over a set of monomials. Every distinct monomial
/// becomes one node; a node of degree two or more is the product of an
/// earlier entry (the largest one dividing it, so the quotient is as small
/// as possible) and the node for that quotient, inserted on demand.
#[derive(Debug)]
pub(crate) enum DagNode {
    Var(usize),
    Prod(usize, usize),
}

#[derive(Debug, Default)]
pub(crate) struct MonoDag {
    /// Children always precede parents.
    pub(crate) nodes: Vec<DagNode>,
    by_mono: BTreeMap<Mono, usize>,
}

impl MonoDag {
    pub(crate) fn build<'a>(monomials: impl Iterator<Item = &'a Mono>) -> MonoDag {
        let mut dag = MonoDag::default();
        let wanted: std::collections::BTreeSet<Mono> =
            monomials.filter(|m| !m.is_one()).cloned().collect();
        // Seed one leaf per variable; they are the divisors of last resort.
        for m in &wanted {
            for v in m.vars() {
                let key = Mono::var(v);
                if !dag.by_mono.contains_key(&key) {
                    let id = dag.nodes.len();
                    dag.nodes.push(DagNode::Var(v));
                    dag.by_mono.insert(key, id);
                }
            }
        }
        // Grevlex iteration is ascending total degree, so divisors of a
        // monomial are planned before it.
        for m in &wanted {
            dag.plan(m);
        }
        dag
    }

    fn plan(&mut self, m: &Mono) -> usize {
        if let Some(&id) = self.by_mono.get(m) {
            return id;
        }
        let mut best: Option<(Mono, usize)> = None;
        for (e, &id) in &self.by_mono {
            if e.divides(m)
                && e != m
                && best.as_ref().is_none_or(|(b, _)| e.total_degree() > b.total_degree())
            {
                best = Some((e.clone(), id));
            }
        }
        let (e, eid) = best.expect("variable leaves divide every monomial");
        let q = e.div_into(m);
        let qid = self.plan(&q);
        let id = self.nodes.len();
        self.nodes.push(DagNode::Prod(eid, qid));
        self.by_mono.insert(m.clone(), id);
        id
    }

    pub(crate) fn node_of(&self, m: &Mono) -> Option<usize> {
        self.by_mono.get(m).copied()
    }

    pub(crate) fn len(&self) -> usize {
        self.nodes.len()
    }
}

/// Counters from one `eval_batch` call, for tests that pin down sharing.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EvalStats {
    /// Distinct non-constant monomials across the batch.
    pub distinct_monomials: usize,
    /// Monomial products actually performed; one per non-leaf DAG node.
    pub products: usize,
    /// Monomial occurrences summed over all polynomials.
    pub term_occurrences: usize,
}

/// Evaluate a batch of polynomials at a common point, computing every
/// distinct monomial exactly once across the whole batch.
pub fn eval_batch<F: FieldCtx>(
    polys: &[MultiPoly<F>],
    point: &HashMap<usize, F::Elem>,
) -> Result<(Vec<F::Elem>, EvalStats)> {
    let Some(first) = polys.first() else {
        return Ok((
            Vec::new(),
            EvalStats { distinct_monomials: 0, products: 0, term_occurrences: 0 },
        ));
    };
    let f = first.field().clone();
    for p in polys {
        if *p.field() != f {
            return Err(Error::usage("mixed coefficient fields in one batch"));
        }
    }
    let dag = MonoDag::build(polys.iter().flat_map(|p| p.terms().map(|(m, _)| m)));
    let mut values: Vec<F::Elem> = Vec::with_capacity(dag.len());
    let mut products = 0usize;
    for node in &dag.nodes {
        let v = match node {
            DagNode::Var(idx) => point
                .get(idx)
                .cloned()
                .ok_or_else(|| Error::usage(format!("no value for variable index {idx}")))?,
            DagNode::Prod(a, b) => {
                products += 1;
                f.mul(&values[*a], &values[*b])
            }
        };
        values.push(v);
    }
    let mut term_occurrences = 0usize;
    let mut distinct = std::collections::BTreeSet::new();
    let results = polys
        .iter()
        .map(|p| {
            let mut acc = f.zero();
            for (m, c) in p.terms() {
                term_occurrences += 1;
                if m.is_one() {
                    acc = f.add(&acc, c);
                } else {
                    distinct.insert(m.clone());
                    let id = dag.node_of(m).expect("planned above");
                    acc = f.add(&acc, &f.mul(c, &values[id]));
                }
            }
            acc
        })
        .collect();
    let stats = EvalStats { distinct_monomials: distinct.len(), products, term_occurrences };
    Ok((results, stats))
}

/// A polynomial lowered to DAG-node references: constant term plus
/// (coefficient, node) pairs.
struct PolyPlan<F: FieldCtx> {
    constant: F::Elem,
    terms: Vec<(F::Elem, usize)>,
}

impl<F: FieldCtx> PolyPlan<F> {
    fn lower(p: &MultiPoly<F>, dag: &MonoDag, f: &F) -> Self {
        let mut constant = f.zero();
        let mut terms = Vec::new();
        for (m, c) in p.terms() {
            if m.is_one() {
                constant = f.add(&constant, c);
            } else {
                terms.push((c.clone(), dag.node_of(m).expect("monomial planned")));
            }
        }
        PolyPlan { constant, terms }
    }

    /// Coefficient k of the polynomial composed with the node series.
    fn coeff(&self, k: usize, node_coeffs: &[Vec<F::Elem>], f: &F) -> F::Elem {
        let mut acc = if k == 0 { self.constant.clone() } else { f.zero() };
        for (c, id) in &self.terms {
            acc = f.add(&acc, &f.mul(c, &node_coeffs[*id][k]));
        }
        acc
    }
}

/// Taylor expansions of one trajectory of a model.
#[derive(Debug)]
pub struct OdeSolution<F: FieldCtx> {
    /// Aligned with `model.states()`.
    pub state: Vec<TruncatedSeries<F>>,
    /// Aligned with `model.outputs()`.
    pub output: Vec<TruncatedSeries<F>>,
    /// Aligned with `model.inputs()`; echoes the inputs, truncated.
    pub input: Vec<TruncatedSeries<F>>,
}

impl<F: FieldCtx> OdeSolution<F> {
    /// Series of the group based at `base`, whichever role it plays.
    pub fn series_of(&self, m: &Model, base: usize) -> Option<&TruncatedSeries<F>> {
        if let Some(i) = m.states().iter().position(|&x| x == base) {
            return Some(&self.state[i]);
        }
        if let Some(j) = m.outputs().iter().position(|&y| y == base) {
            return Some(&self.output[j]);
        }
        if let Some(l) = m.inputs().iter().position(|&u| u == base) {
            return Some(&self.input[l]);
        }
        None
    }
}

/// Expand the solution of x' = f(x, mu, u), y = g(x, mu, u) around t = 0
/// to `order` coefficients, exactly, over any coefficient field.
///
/// The common denominator Q must not vanish at the initial data; that
/// failure is reported as `DenominatorVanished` so callers can resample.
pub fn solve_ode_series<F: FieldCtx>(
    m: &Model,
    field: &F,
    mu: &[F::Elem],
    x0: &[F::Elem],
    u: &[TruncatedSeries<F>],
    order: usize,
) -> Result<OdeSolution<F>> {
    if mu.len() != m.params().len() {
        return Err(Error::usage("one value per parameter required"));
    }
    if x0.len() != m.states().len() {
        return Err(Error::usage("one initial value per state required"));
    }
    if u.len() != m.inputs().len() {
        return Err(Error::usage("one series per input required"));
    }
    if let Some(short) = u.iter().find(|s| s.precision() < order) {
        return Err(Error::usage(format!(
            "input series precision {} is below the requested order {order}",
            short.precision()
        )));
    }
    if order == 0 {
        return Ok(OdeSolution { state: Vec::new(), output: Vec::new(), input: Vec::new() });
    }

    // Lower Q, F_i, G_j into one shared monomial DAG.
    let conv = |p: &crate::poly::QPoly| p.map_field(field, |c| field.from_rational(c));
    let q = conv(m.q())?;
    let fs = m.f_num().iter().map(&conv).collect::<Result<Vec<_>>>()?;
    let gs = m.g_num().iter().map(&conv).collect::<Result<Vec<_>>>()?;
    let dag = MonoDag::build(
        std::iter::once(&q).chain(&fs).chain(&gs).flat_map(|p| p.terms().map(|(mo, _)| mo)),
    );
    let q_plan = PolyPlan::lower(&q, &dag, field);
    let f_plans: Vec<_> = fs.iter().map(|p| PolyPlan::lower(p, &dag, field)).collect();
    let g_plans: Vec<_> = gs.iter().map(|p| PolyPlan::lower(p, &dag, field)).collect();

    // Role of each variable leaf, resolved once.
    enum Leaf {
        Param(usize),
        State(usize),
        Input(usize),
    }
    let mut leaf_roles: Vec<Option<Leaf>> = Vec::with_capacity(dag.len());
    for node in &dag.nodes {
        leaf_roles.push(match node {
            DagNode::Var(v) => {
                if let Some(i) = m.params().iter().position(|&p| p == *v) {
                    Some(Leaf::Param(i))
                } else if let Some(i) = m.states().iter().position(|&x| x == *v) {
                    Some(Leaf::State(i))
                } else if let Some(i) = m.inputs().iter().position(|&uu| uu == *v) {
                    Some(Leaf::Input(i))
                } else {
                    return Err(Error::internal(format!(
                        "equation variable {v} is not a parameter, state or input"
                    )));
                }
            }
            DagNode::Prod(..) => None,
        });
    }

    let mut x: Vec<Vec<F::Elem>> = x0.iter().map(|c| vec![c.clone()]).collect();
    let mut node_coeffs: Vec<Vec<F::Elem>> = (0..dag.len()).map(|_| Vec::new()).collect();
    let mut q_c: Vec<F::Elem> = Vec::new();
    let mut r_c: Vec<F::Elem> = Vec::new();
    let mut f_c: Vec<Vec<F::Elem>> = (0..fs.len()).map(|_| Vec::new()).collect();
    let mut g_c: Vec<Vec<F::Elem>> = (0..gs.len()).map(|_| Vec::new()).collect();
    let mut y: Vec<Vec<F::Elem>> = (0..gs.len()).map(|_| Vec::new()).collect();

    let convolve = |a: &[F::Elem], b: &[F::Elem], k: usize| {
        let mut acc = field.zero();
        for i in 0..=k {
            acc = field.add(&acc, &field.mul(&a[i], &b[k - i]));
        }
        acc
    };

    for k in 0..order {
        // One new coefficient for every DAG node; children come first, so
        // the convolution below only touches coefficients already stored.
        for (id, node) in dag.nodes.iter().enumerate() {
            let ck = match node {
                DagNode::Var(_) => match leaf_roles[id].as_ref().expect("leaf role") {
                    Leaf::Param(i) => {
                        if k == 0 {
                            mu[*i].clone()
                        } else {
                            field.zero()
                        }
                    }
                    Leaf::State(i) => x[*i][k].clone(),
                    Leaf::Input(i) => u[*i].coeff(k).clone(),
                },
                DagNode::Prod(a, b) => convolve(&node_coeffs[*a], &node_coeffs[*b], k),
            };
            node_coeffs[id].push(ck);
        }
        q_c.push(q_plan.coeff(k, &node_coeffs, field));
        let rk = if k == 0 {
            field.inv(&q_c[0]).ok_or_else(|| {
                Error::DenominatorVanished("common denominator Q at the initial data".into())
            })?
        } else {
            let mut acc = field.zero();
            for i in 1..=k {
                acc = field.add(&acc, &field.mul(&q_c[i], &r_c[k - i]));
            }
            field.neg(&field.mul(&r_c[0], &acc))
        };
        r_c.push(rk);
        for (j, gp) in g_plans.iter().enumerate() {
            g_c[j].push(gp.coeff(k, &node_coeffs, field));
            // y_j = G_j / Q as a Cauchy product with the reciprocal.
            y[j].push(convolve(&g_c[j], &r_c, k));
        }
        if k + 1 < order {
            let inv_k1 = field
                .inv(&field.from_i64((k + 1) as i64))
                .ok_or_else(|| Error::internal("characteristic divides a derivative order"))?;
            for (i, fp) in f_plans.iter().enumerate() {
                f_c[i].push(fp.coeff(k, &node_coeffs, field));
                // x_i' = F_i / Q, integrated termwise.
                let xdot_k = convolve(&f_c[i], &r_c, k);
                x[i].push(field.mul(&xdot_k, &inv_k1));
            }
        }
    }

    let state = x
        .into_iter()
        .map(|c| TruncatedSeries::new(field.clone(), c))
        .collect();
    let output = y
        .into_iter()
        .map(|c| TruncatedSeries::new(field.clone(), c))
        .collect();
    let input = u.iter().map(|s| s.truncate(order)).collect();
    Ok(OdeSolution { state, output, input })
}

/// Evaluate a polynomial on series values for its variables; test helper
/// for plugging solutions back into equations.
pub fn eval_poly_on_series<F: FieldCtx>(
    p: &MultiPoly<F>,
    assign: &HashMap<usize, TruncatedSeries<F>>,
    precision: usize,
) -> Result<TruncatedSeries<F>> {
    let f = p.field().clone();
    let mut acc = TruncatedSeries::zero(f.clone(), precision);
    for (m, c) in p.terms() {
        let mut term = TruncatedSeries::constant(f.clone(), c.clone(), precision);
        for v in m.vars() {
            let s = assign
                .get(&v)
                .ok_or_else(|| Error::usage(format!("no series for variable index {v}")))?;
            for _ in 0..m.deg(v) {
                term = term.mul(s);
            }
        }
        acc = acc.add(&term);
    }
    Ok(acc)
}
