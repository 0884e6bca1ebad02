//! ODE model representation.
//!
//! A model is a rational dynamical system: states evolve by x' = f(x, mu, u),
//! outputs observe y = g(x, mu, u), parameters stay constant, inputs are
//! free. After parsing, all right-hand sides share one denominator Q so the
//! differential ideal generators Q x_i' - F_i and Q y_j - G_j are plain
//! polynomials. Models are immutable once built.

mod parse;

pub use parse::{parse_expression, parse_model};

use std::collections::HashMap;
use std::fmt;

use crate::coeff::QField;
use crate::error::{Error, Result};
use crate::poly::{gcd, lie_derivative, QPoly};
use crate::ratfun::RatFun;
use crate::vartable::{VarKind, VarTable};

#[derive(Clone, Debug)]
pub struct Model {
    table: VarTable,
    params: Vec<usize>,
    states: Vec<usize>,
    outputs: Vec<usize>,
    inputs: Vec<usize>,
    rhs: Vec<RatFun>,
    out: Vec<RatFun>,
    q: QPoly,
    f_num: Vec<QPoly>,
    g_num: Vec<QPoly>,
}

impl Model {
    /// Build a model from resolved parts, clearing denominators to the
    /// least common one.
    pub fn assemble(
        table: VarTable,
        params: Vec<usize>,
        states: Vec<usize>,
        outputs: Vec<usize>,
        inputs: Vec<usize>,
        rhs: Vec<RatFun>,
        out: Vec<RatFun>,
    ) -> Result<Self> {
        if rhs.len() != states.len() {
            return Err(Error::usage("one equation per state required"));
        }
        if out.len() != outputs.len() {
            return Err(Error::usage("one equation per output required"));
        }
        let mut q = QPoly::from_int(1).with_table(&table);
        for den in rhs.iter().chain(out.iter()).map(|r| r.den()) {
            let g = gcd(&q, den)?;
            q = q.mul(den)?.exact_div(&g)?.expect("gcd divides");
        }
        let f_num = rhs
            .iter()
            .map(|r| {
                let cof = q.exact_div(r.den())?.expect("den divides lcm");
                r.num().mul(&cof)
            })
            .collect::<Result<Vec<_>>>()?;
        let g_num = out
            .iter()
            .map(|r| {
                let cof = q.exact_div(r.den())?.expect("den divides lcm");
                r.num().mul(&cof)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Model { table, params, states, outputs, inputs, rhs, out, q, f_num, g_num })
    }

    pub fn table(&self) -> &VarTable {
        &self.table
    }

    pub fn params(&self) -> &[usize] {
        &self.params
    }

    pub fn states(&self) -> &[usize] {
        &self.states
    }

    pub fn outputs(&self) -> &[usize] {
        &self.outputs
    }

    pub fn inputs(&self) -> &[usize] {
        &self.inputs
    }

    pub fn rhs(&self) -> &[RatFun] {
        &self.rhs
    }

    pub fn out(&self) -> &[RatFun] {
        &self.out
    }

    /// The common denominator of all right-hand sides.
    pub fn q(&self) -> &QPoly {
        &self.q
    }

    /// Numerators of the state equations: Q * f_i.
    pub fn f_num(&self) -> &[QPoly] {
        &self.f_num
    }

    /// Numerators of the output equations: Q * g_j.
    pub fn g_num(&self) -> &[QPoly] {
        &self.g_num
    }

    fn names(&self, idx: &[usize]) -> Vec<String> {
        idx.iter().map(|&v| self.table.base_name(v).to_string()).collect()
    }

    /// Canonical source text; parsing it back yields an equal model.
    pub fn to_source(&self) -> String {
        let mut s = String::new();
        let header = |out: &mut String, label: &str, names: &[String]| {
            if !names.is_empty() {
                out.push_str(label);
                out.push_str(": ");
                out.push_str(&names.join(", "));
                out.push('\n');
            }
        };
        header(&mut s, "parameters", &self.names(&self.params));
        header(&mut s, "states", &self.names(&self.states));
        header(&mut s, "inputs", &self.names(&self.inputs));
        header(&mut s, "outputs", &self.names(&self.outputs));
        for (i, &x) in self.states.iter().enumerate() {
            s.push_str(&format!(
                "{}' = {}\n",
                self.table.base_name(x),
                self.rhs[i].display(&self.table)
            ));
        }
        for (j, &y) in self.outputs.iter().enumerate() {
            s.push_str(&format!(
                "{} = {}\n",
                self.table.base_name(y),
                self.out[j].display(&self.table)
            ));
        }
        s
    }

    /// Structural equality: same declarations in the same roles and equal
    /// right-hand sides, independent of internal variable numbering.
    pub fn structurally_equal(&self, other: &Model) -> bool {
        self.names(&self.params) == other.names(&other.params)
            && self.names(&self.states) == other.names(&other.states)
            && self.names(&self.outputs) == other.names(&other.outputs)
            && self.names(&self.inputs) == other.names(&other.inputs)
            && self
                .rhs
                .iter()
                .zip(&other.rhs)
                .all(|(a, b)| a.display(&self.table) == b.display(&other.table))
            && self
                .out
                .iter()
                .zip(&other.out)
                .all(|(a, b)| a.display(&self.table) == b.display(&other.table))
    }

    /// The r-fold replica: states, outputs and inputs are copied r times
    /// with suffixed names, parameters are shared across copies.
    pub fn replicate(&self, r: u32) -> Result<Model> {
        if r == 0 {
            return Err(Error::usage("replica count must be at least 1"));
        }
        if r == 1 {
            return Ok(self.clone());
        }
        let mut table = VarTable::new();
        let mut params = Vec::new();
        let mut param_map = HashMap::new();
        for &p in &self.params {
            let np = table.add(self.table.base_name(p), VarKind::Parameter)?;
            param_map.insert(p, np);
            params.push(np);
        }
        let mut states = Vec::new();
        let mut outputs = Vec::new();
        let mut inputs = Vec::new();
        let mut rhs = Vec::new();
        let mut out = Vec::new();
        for k in 1..=r {
            let mut map = param_map.clone();
            for &x in &self.states {
                let name = format!("{}_r{k}", self.table.base_name(x));
                let nx = table.add(&name, VarKind::State)?;
                map.insert(x, nx);
                states.push(nx);
            }
            for &u in &self.inputs {
                let name = format!("{}_r{k}", self.table.base_name(u));
                let nu = table.add(&name, VarKind::Input)?;
                map.insert(u, nu);
                inputs.push(nu);
            }
            for &y in &self.outputs {
                let name = format!("{}_r{k}", self.table.base_name(y));
                let ny = table.add(&name, VarKind::Output)?;
                outputs.push(ny);
            }
            let remap = |r: &RatFun| -> Result<RatFun> {
                RatFun::new(
                    r.num().remap_vars(|v| map[&v]).with_table(&table),
                    r.den().remap_vars(|v| map[&v]).with_table(&table),
                )
            };
            for f in &self.rhs {
                rhs.push(remap(f)?);
            }
            for g in &self.out {
                out.push(remap(g)?);
            }
        }
        // Regroup copy-major lists into role-major order used above.
        Model::assemble(table, params, states, outputs, inputs, rhs, out)
    }
}

/// One entry of a profile: a derivative order bound, possibly infinite.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ProfileEntry {
    Finite(u32),
    Infinite,
}

impl ProfileEntry {
    pub fn finite(self) -> Option<u32> {
        match self {
            ProfileEntry::Finite(h) => Some(h),
            ProfileEntry::Infinite => None,
        }
    }
}

impl fmt::Display for ProfileEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProfileEntry::Finite(h) => write!(f, "{h}"),
            ProfileEntry::Infinite => write!(f, "inf"),
        }
    }
}

/// Derivative-order profile, one entry per differential variable group.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Profile {
    pub entries: Vec<ProfileEntry>,
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

/// A projection-based representation: per differential variable group the
/// profile entry and, when finite, the projection polynomial whose leading
/// variable is that group at the profile order.
#[derive(Clone, Debug)]
pub struct Representation {
    pub table: VarTable,
    /// Base variable index per group, states then outputs then inputs.
    pub groups: Vec<usize>,
    pub profile: Profile,
    /// One polynomial per group; zero where the profile entry is infinite.
    pub projections: Vec<QPoly>,
}

impl Representation {
    pub fn group_of(&self, base: usize) -> Option<usize> {
        self.groups.iter().position(|&g| g == base)
    }

    /// The leading variable of group `i`: its base at the profile order.
    pub fn leading_var(&self, i: usize) -> Option<usize> {
        let h = self.profile.entries[i].finite()?;
        let mut v = self.groups[i];
        for _ in 0..h {
            v = self.table.successor(v)?;
        }
        Some(v)
    }

    /// Verify the structural invariant: each finite-profile projection is
    /// nonzero and involves, beyond base variables, exactly its own
    /// leading variable with positive degree.
    pub fn check_invariant(&self) -> Result<()> {
        for (i, p) in self.projections.iter().enumerate() {
            match self.profile.entries[i] {
                ProfileEntry::Infinite => {
                    if !p.is_zero() {
                        return Err(Error::internal("projection present for an infinite entry"));
                    }
                }
                ProfileEntry::Finite(h) => {
                    let lead = self
                        .leading_var(i)
                        .ok_or_else(|| Error::internal("leading variable missing from table"))?;
                    if p.deg(lead) == 0 {
                        return Err(Error::internal(format!(
                            "projection {i} must involve its leading variable {}",
                            self.table.display_name(lead)
                        )));
                    }
                    let _ = h;
                    for v in p.support() {
                        if v == lead || self.table.kind(v) == VarKind::Parameter {
                            continue;
                        }
                        let base = self.table.base(v);
                        let g = self
                            .group_of(base)
                            .ok_or_else(|| Error::internal("variable outside known groups"))?;
                        let ord = self.table.order(v);
                        let ok = match self.profile.entries[g] {
                            ProfileEntry::Finite(hg) => ord < hg,
                            // infinite-profile groups (free inputs) are
                            // never eliminated; every order is a base var
                            ProfileEntry::Infinite => true,
                        };
                        if !ok {
                            return Err(Error::internal(format!(
                                "projection {i} contains non-base variable {}",
                                self.table.display_name(v)
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Render the nonzero projections with the group labels.
    pub fn display_projections(&self) -> Vec<(String, String)> {
        self.groups
            .iter()
            .zip(self.projections.iter())
            .filter(|(_, p)| !p.is_zero())
            .map(|(&g, p)| (self.table.base_name(g).to_string(), p.display_q(&self.table)))
            .collect()
    }
}

/// The representation every elimination run starts from: profile entries 1
/// for states, 0 for outputs, infinity for inputs, and the cleared
/// equations as projections.
pub fn initial_representation(m: &Model) -> Result<Representation> {
    let mut table = m.table().clone();
    let mut groups = Vec::new();
    let mut entries = Vec::new();
    let mut projections = Vec::new();
    for (i, &x) in m.states().iter().enumerate() {
        let xdot = table.ensure_successor(x)?;
        let proj = m
            .q()
            .mul(&QPoly::var(QField, xdot).with_table(&table))?
            .sub(&m.f_num()[i])?
            .normalize_unit();
        groups.push(x);
        entries.push(ProfileEntry::Finite(1));
        projections.push(proj);
    }
    for (j, &y) in m.outputs().iter().enumerate() {
        let proj = m
            .q()
            .mul(&QPoly::var(QField, y).with_table(&table))?
            .sub(&m.g_num()[j])?
            .normalize_unit();
        groups.push(y);
        entries.push(ProfileEntry::Finite(0));
        projections.push(proj);
    }
    for &u in m.inputs() {
        groups.push(u);
        entries.push(ProfileEntry::Infinite);
        projections.push(QPoly::zero(QField).with_table(&table));
    }
    let rep = Representation { table, groups, profile: Profile { entries }, projections };
    rep.check_invariant()?;
    Ok(rep)
}

/// Differential generators of the model ideal up to derivative order
/// `ord`: the cleared equations and their Lie derivatives. Used by series
/// plug-back checks and the membership oracle's candidate evaluation.
pub fn generators_to_order(m: &Model, ord: u32) -> Result<(VarTable, Vec<QPoly>)> {
    let mut table = m.table().clone();
    let mut gens = Vec::new();
    for (i, &x) in m.states().iter().enumerate() {
        let xdot = table.ensure_successor(x)?;
        let g = m
            .q()
            .mul(&QPoly::var(QField, xdot).with_table(&table))?
            .sub(&m.f_num()[i])?;
        gens.push(g);
    }
    for (j, &y) in m.outputs().iter().enumerate() {
        let g = m
            .q()
            .mul(&QPoly::var(QField, y).with_table(&table))?
            .sub(&m.g_num()[j])?;
        gens.push(g);
    }
    let base: Vec<QPoly> = gens.clone();
    for g in base {
        let mut cur = g;
        for _ in 0..ord {
            for v in cur.support() {
                if table.kind(v) != VarKind::Parameter {
                    table.ensure_successor(v)?;
                }
            }
            cur = lie_derivative(&cur, &table)?;
            gens.push(cur.clone());
        }
    }
    Ok((table, gens))
}

#[cfg(test)]
mod tests {
    use super::*;

    const HARMONIC: &str = "\
parameters: mu
states: x1, x2
outputs: y
x1' = -mu*x2
x2' = mu*x1
y = x1
";

    #[test]
    fn parse_print_parse_is_fixed_point() {
        let m = parse_model(HARMONIC).unwrap();
        let printed = m.to_source();
        let m2 = parse_model(&printed).unwrap();
        assert!(m.structurally_equal(&m2), "printed form:\n{printed}");
        assert_eq!(printed, m2.to_source());
    }

    #[test]
    fn initial_representation_of_harmonic() {
        let text = "states: x1, x2\noutputs: y\nx1' = -x2\nx2' = x1\ny = x1\n";
        let m = parse_model(text).unwrap();
        let rep = initial_representation(&m).unwrap();
        assert_eq!(
            rep.profile,
            Profile {
                entries: vec![
                    ProfileEntry::Finite(1),
                    ProfileEntry::Finite(1),
                    ProfileEntry::Finite(0)
                ]
            }
        );
        let shown: Vec<String> =
            rep.projections.iter().map(|p| p.display_q(&rep.table)).collect();
        assert_eq!(shown, vec!["x1' + x2", "x2' - x1", "y - x1"]);
        rep.check_invariant().unwrap();
    }

    #[test]
    fn toy_squared_output() {
        let m = parse_model("states: x\noutputs: y\nx' = x\ny = x^2\n").unwrap();
        let rep = initial_representation(&m).unwrap();
        let shown: Vec<String> =
            rep.projections.iter().map(|p| p.display_q(&rep.table)).collect();
        assert_eq!(shown, vec!["x' - x", "y - x^2"]);
    }

    #[test]
    fn common_denominator_is_lcm() {
        let m = parse_model(
            "parameters: a\nstates: x1, x2\noutputs: y\nx1' = 1/x2\nx2' = a/(x1*x2)\ny = x1\n",
        )
        .unwrap();
        // lcm(x2, x1 x2) = x1 x2.
        let q = m.q().display_q(m.table());
        assert_eq!(q, "x1*x2");
        // F_1 = x1, F_2 = a, G = x1^2 x2.
        assert_eq!(m.f_num()[0].display_q(m.table()), "x1");
        assert_eq!(m.f_num()[1].display_q(m.table()), "a");
        assert_eq!(m.g_num()[0].display_q(m.table()), "x1^2*x2");
    }

    #[test]
    fn replicate_counts_and_sharing() {
        let m = parse_model(
            "parameters: mu1, mu2\nstates: x\noutputs: y1, y2\nx' = 0\ny1 = x\ny2 = mu1*x + mu2\n",
        )
        .unwrap();
        let r2 = m.replicate(2).unwrap();
        assert_eq!(r2.states().len(), 2);
        assert_eq!(r2.outputs().len(), 4);
        assert_eq!(r2.params().len(), 2);
        assert_eq!(r2.inputs().len(), 0);
        let src = r2.to_source();
        assert!(src.contains("x_r1' = 0"), "got:\n{src}");
        assert!(src.contains("y2_r2 = mu2 + mu1*x_r2"), "got:\n{src}");
        // r = 1 keeps everything.
        let r1 = m.replicate(1).unwrap();
        assert!(r1.structurally_equal(&m));
    }

    #[test]
    fn replicate_three_scales_linearly() {
        let m = parse_model(
            "parameters: a\nstates: x1, x2\ninputs: u\noutputs: y\nx1' = a*x1 + u\nx2' = x1\ny = x2\n",
        )
        .unwrap();
        for r in 1..=3u32 {
            let mr = m.replicate(r).unwrap();
            assert_eq!(mr.states().len(), 2 * r as usize);
            assert_eq!(mr.outputs().len(), r as usize);
            assert_eq!(mr.inputs().len(), r as usize);
            assert_eq!(mr.params().len(), 1);
        }
    }

    #[test]
    fn generators_include_lie_rows() {
        let m = parse_model("states: x\noutputs: y\nx' = x\ny = x^2\n").unwrap();
        let (table, gens) = generators_to_order(&m, 1).unwrap();
        // Base generators plus one Lie derivative of each.
        assert_eq!(gens.len(), 4);
        let shown: Vec<String> = gens.iter().map(|p| p.display_q(&table)).collect();
        assert!(shown.contains(&"x' - x".to_string()));
        assert!(shown.contains(&"x'' - x'".to_string()));
        assert!(shown.iter().any(|s| s.contains("y'")), "lie of output row: {shown:?}");
    }
}
