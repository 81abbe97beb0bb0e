//! Bounded-degree linear solving: unknown coefficients are fresh parameters
//! `_k0, _k1, ...`, residuals are matched monomial by monomial and the
//! resulting system is reduced by fraction-free elimination.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::conformal::{
    check_anti_derivation, check_derivation, inner_anti_derivation, inner_derivation, slot, Basis,
    CMap, Chirality, ConformalAlgebra, ModElem, PairTable,
};
use crate::error::{Error, Result};
use crate::extend::check_twisted;
use crate::poly::{Monomial, Poly, Rational, Var};
use crate::report::{Report, Residual};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

/// `A k = rhs` over the rationals.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LinearSystem {
    pub unknowns: Vec<String>,
    pub rows: Vec<Vec<Rational>>,
    pub rhs: Vec<Rational>,
}

impl LinearSystem {
    pub fn new(unknowns: Vec<String>) -> Self {
        LinearSystem {
            unknowns,
            rows: Vec::new(),
            rhs: Vec::new(),
        }
    }

    pub fn is_homogeneous(&self) -> bool {
        self.rhs.iter().all(Zero::is_zero)
    }
}

/// Solutions of a linear system: a particular solution, if any, and a
/// basis of the kernel.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Kernel {
    pub particular: Option<Vec<Rational>>,
    pub basis: Vec<Vec<Rational>>,
    pub rank: usize,
}

/// A basis of solutions valid at degree `<= bound`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolutionSpace<T> {
    pub basis: Vec<T>,
    pub bound: u32,
}

impl<T> SolutionSpace<T> {
    pub fn dimension(&self) -> usize {
        self.basis.len()
    }
}

fn is_unknown(v: &Var, names: &BTreeSet<&str>) -> bool {
    matches!(v, Var::Param(p) if names.contains(p.as_ref()))
}

/// Turn residuals that must vanish identically into a linear system in
/// `unknowns`. Every other variable, parameters included, is matched
/// coefficientwise.
pub fn linearize(residuals: &[Poly], unknowns: &[String]) -> Result<LinearSystem> {
    let names: BTreeSet<&str> = unknowns.iter().map(String::as_str).collect();
    let index: BTreeMap<&str, usize> = unknowns
        .iter()
        .enumerate()
        .map(|(i, n)| (n.as_str(), i))
        .collect();
    let mut sys = LinearSystem::new(unknowns.to_vec());
    for r in residuals {
        let groups = r.collect_by(|v| !is_unknown(v, &names));
        for (mono, cof) in groups {
            let mut row = vec![Rational::zero(); unknowns.len()];
            let mut constant = Rational::zero();
            for (m, c) in cof.terms() {
                match m.factors() {
                    [] => constant = c.clone(),
                    [(Var::Param(p), 1)] => row[index[p.as_ref()]] = c.clone(),
                    _ => {
                        return Err(Error::Nonlinear(format!(
                            "term {} of the coefficient of {mono}",
                            Poly::term(c.clone(), m.clone())
                        )))
                    }
                }
            }
            sys.rows.push(row);
            sys.rhs.push(-constant);
        }
    }
    Ok(sys)
}

pub fn linearize_elems(residuals: &[ModElem], unknowns: &[String]) -> Result<LinearSystem> {
    let polys: Vec<Poly> = residuals
        .iter()
        .flat_map(|e| e.components().map(|(_, p)| p.clone()).collect::<Vec<_>>())
        .collect();
    linearize(&polys, unknowns)
}

fn integer_row(row: &[Rational], rhs: &Rational) -> Vec<BigInt> {
    let lcm = row
        .iter()
        .chain(std::iter::once(rhs))
        .fold(BigInt::one(), |acc, r| acc.lcm(r.denom()));
    row.iter()
        .chain(std::iter::once(rhs))
        .map(|r| r.numer() * (&lcm / r.denom()))
        .collect()
}

/// Bareiss elimination on the augmented matrix; returns the echelon rows
/// and the pivot columns.
fn bareiss(m: &mut [Vec<BigInt>], ncols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut prev = BigInt::one();
    let mut r = 0;
    let width = ncols + 1;
    for c in 0..ncols {
        if r == m.len() {
            break;
        }
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        for i in r + 1..m.len() {
            for j in c + 1..width {
                let v = &m[r][c] * &m[i][j] - &m[i][c] * &m[r][j];
                m[i][j] = v / &prev;
            }
            m[i][c] = BigInt::zero();
        }
        prev = m[r][c].clone();
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Exact solution of `sys`: the kernel basis has one vector per free
/// column, in increasing column order, with a 1 in that column.
pub fn solve_linear(sys: &LinearSystem) -> Kernel {
    let n = sys.unknowns.len();
    let mut m: Vec<Vec<BigInt>> = sys
        .rows
        .iter()
        .zip(&sys.rhs)
        .map(|(row, b)| integer_row(row, b))
        .filter(|row| row.iter().any(|x| !x.is_zero()))
        .collect();
    let pivots = bareiss(&mut m, n);
    let rank = pivots.len();
    let consistent = m[rank..].iter().all(|row| row[n].is_zero());

    // Reduced echelon form over the rationals.
    let mut red: Vec<Vec<Rational>> = m[..rank]
        .iter()
        .zip(&pivots)
        .map(|(row, &pc)| {
            let piv = Rational::from_integer(row[pc].clone());
            row.iter()
                .map(|x| Rational::from_integer(x.clone()) / &piv)
                .collect()
        })
        .collect();
    for k in (0..rank).rev() {
        let pc = pivots[k];
        for i in 0..k {
            let f = red[i][pc].clone();
            if f.is_zero() {
                continue;
            }
            let (head, tail) = red.split_at_mut(k);
            for (x, y) in head[i][pc..=n].iter_mut().zip(&tail[0][pc..=n]) {
                *x -= y * &f;
            }
        }
    }

    let pivot_set: BTreeSet<usize> = pivots.iter().copied().collect();
    let mut basis = Vec::new();
    for f in (0..n).filter(|c| !pivot_set.contains(c)) {
        let mut v = vec![Rational::zero(); n];
        v[f] = Rational::one();
        for (k, &pc) in pivots.iter().enumerate() {
            v[pc] = -red[k][f].clone();
        }
        basis.push(v);
    }
    let particular = consistent.then(|| {
        let mut v = vec![Rational::zero(); n];
        for (k, &pc) in pivots.iter().enumerate() {
            v[pc] = red[k][n].clone();
        }
        v
    });
    Kernel {
        particular,
        basis,
        rank,
    }
}

/// Rank of a list of rational vectors of equal length.
pub fn rank(vectors: &[Vec<Rational>]) -> usize {
    let Some(first) = vectors.first() else {
        return 0;
    };
    let n = first.len();
    let mut sys = LinearSystem::new((0..n).map(|i| i.to_string()).collect());
    for v in vectors {
        sys.rows.push(v.clone());
        sys.rhs.push(Rational::zero());
    }
    solve_linear(&sys).rank
}

/// Fresh unknown coefficients.
#[derive(Clone, Debug, Default)]
pub struct Ansatz {
    names: Vec<String>,
}

impl Ansatz {
    pub fn new() -> Self {
        Ansatz::default()
    }

    pub fn unknowns(&self) -> &[String] {
        &self.names
    }

    pub fn fresh(&mut self) -> Poly {
        let name = format!("_k{}", self.names.len());
        let p = Poly::var(Var::param(&name));
        self.names.push(name);
        p
    }

    /// `sum k_e x^e` over exponent vectors with each entry `<= dmax`.
    pub fn poly(&mut self, vars: &[Var], dmax: u32) -> Poly {
        let mut out = Poly::zero();
        let mut exps = vec![0u32; vars.len()];
        loop {
            let mono =
                Monomial::from_pairs(vars.iter().cloned().zip(exps.iter().copied()).collect());
            out += &(&self.fresh() * &Poly::term(Rational::one(), mono));
            let mut i = 0;
            loop {
                if i == exps.len() {
                    return out;
                }
                if exps[i] < dmax {
                    exps[i] += 1;
                    break;
                }
                exps[i] = 0;
                i += 1;
            }
        }
    }

    /// `sum_k p_k e_k` with each `p_k` a fresh polynomial in `vars`.
    pub fn elem(&mut self, basis: &Basis, vars: &[Var], dmax: u32) -> ModElem {
        let mut out = ModElem::zero();
        for b in basis.iter() {
            out += &ModElem::term(self.poly(vars, dmax), b);
        }
        out
    }

    pub fn values(&self, v: &[Rational]) -> BTreeMap<String, Rational> {
        self.names.iter().cloned().zip(v.iter().cloned()).collect()
    }
}

fn require_specialized(alg: &ConformalAlgebra) -> Result<()> {
    let used: BTreeSet<String> = alg
        .table
        .values()
        .flat_map(|e| {
            e.components()
                .flat_map(|(_, p)| p.params())
                .collect::<Vec<_>>()
        })
        .collect();
    if let Some(p) = used.into_iter().next() {
        return Err(Error::Unspecialized(format!(
            "`{p}` occurs in the bracket table of {}",
            alg.name
        )));
    }
    Ok(())
}

fn report_residuals(rep: &Report, keep: impl Fn(&str) -> bool) -> Vec<Poly> {
    let mut out = Vec::new();
    for item in rep.items.iter().filter(|i| keep(&i.condition)) {
        match &item.residual {
            Residual::Elem(e) => out.extend(e.components().map(|(_, p)| p.clone())),
            Residual::Scalar(p) => out.push(p.clone()),
        }
    }
    out
}

fn homogeneous_kernel(residuals: &[Poly], ans: &Ansatz) -> Result<Vec<Vec<Rational>>> {
    let sys = linearize(residuals, ans.unknowns())?;
    Ok(solve_linear(&sys).basis)
}

fn map_ansatz(ans: &mut Ansatz, alg: &ConformalAlgebra, ch: Chirality, dmax: u32) -> CMap {
    let mut map = CMap::zero(ch);
    for a in alg.basis.iter() {
        map.set(a, ans.elem(&alg.basis, &[Var::L, Var::D], dmax));
    }
    map
}

fn maps_basis(alg: &ConformalAlgebra, dmax: u32, ch: Chirality) -> Result<SolutionSpace<CMap>> {
    require_specialized(alg)?;
    let mut ans = Ansatz::new();
    let map = map_ansatz(&mut ans, alg, ch, dmax);
    let rep = match ch {
        Chirality::Right => check_derivation(alg, &map),
        Chirality::Left => check_anti_derivation(alg, &map),
    };
    let kernel = homogeneous_kernel(&report_residuals(&rep, |_| true), &ans)?;
    let basis = kernel
        .iter()
        .map(|v| map.specialize(&ans.values(v)))
        .collect();
    Ok(SolutionSpace { basis, bound: dmax })
}

/// Conformal derivations (right maps) with entries of degree `<= dmax` in
/// each of `l` and `d`.
pub fn derivations_basis(alg: &ConformalAlgebra, dmax: u32) -> Result<SolutionSpace<CMap>> {
    maps_basis(alg, dmax, Chirality::Right)
}

/// Conformal anti-derivations (left maps) at the same bound.
pub fn anti_derivations_basis(alg: &ConformalAlgebra, dmax: u32) -> Result<SolutionSpace<CMap>> {
    maps_basis(alg, dmax, Chirality::Left)
}

/// Brackets that must vanish for `a` in the left (right) center.
fn center_residuals(alg: &ConformalAlgebra, a: &ModElem, side: Side) -> Vec<Poly> {
    let l = slot(Var::L);
    let mut out = Vec::new();
    for b in alg.basis.iter() {
        let u = ModElem::basis(b);
        let e = match side {
            Side::Left => alg.bracket(a, &u, &l),
            Side::Right => alg.bracket(&u, a, &l),
        };
        out.extend(e.components().map(|(_, p)| p.clone()));
    }
    out
}

/// Elements `sum p_k(d) e_k` with `deg p_k <= dmax` in the left or right
/// center. The basis is ordered by generator, then by power of `d`.
pub fn center_basis(
    alg: &ConformalAlgebra,
    side: Side,
    dmax: u32,
) -> Result<SolutionSpace<ModElem>> {
    require_specialized(alg)?;
    let mut ans = Ansatz::new();
    let a = ans.elem(&alg.basis, &[Var::D], dmax);
    let kernel = homogeneous_kernel(&center_residuals(alg, &a, side), &ans)?;
    let basis = kernel
        .iter()
        .map(|v| a.specialize(&ans.values(v)))
        .collect();
    Ok(SolutionSpace { basis, bound: dmax })
}

/// Coordinates of a map table in the monomials `l^i d^j`, `i, j <= dmax`,
/// plus a flag telling whether the table fits the bound.
fn coordinates(map: &CMap, basis: &Basis, dmax: u32) -> Vec<Rational> {
    let mut out = Vec::new();
    for a in basis.iter() {
        let v = map.get(a);
        for b in basis.iter() {
            let p = v.component(b);
            for i in 0..=dmax {
                for j in 0..=dmax {
                    let m = Monomial::from_pairs(vec![(Var::L, i), (Var::D, j)]);
                    let c = p
                        .terms()
                        .find(|(mm, _)| **mm == m)
                        .map(|(_, c)| c.clone())
                        .unwrap_or_default();
                    out.push(c);
                }
            }
        }
    }
    out
}

/// Coefficients of `map` outside the box `deg_l, deg_d <= dmax`.
fn overflow(map: &CMap, dmax: u32) -> Vec<Poly> {
    let mut out = Vec::new();
    for v in map.table.values() {
        for (_, p) in v.components() {
            let groups = p.collect_by(|v| matches!(v, Var::L | Var::D));
            for (m, cof) in groups {
                if m.exponent(&Var::L) > dmax || m.exponent(&Var::D) > dmax {
                    out.push(cof);
                }
            }
        }
    }
    out
}

/// Dimension of (anti-)derivations modulo inner ones, both taken at degree
/// `<= dmax`. Inner maps are generated by elements `sum p_k(d) e_k` with
/// `deg p_k <= dmax + t + 1`, where `t` is the largest `l`-degree in the
/// bracket table.
pub fn outer_dimension(alg: &ConformalAlgebra, dmax: u32, anti: bool) -> Result<usize> {
    let all = if anti {
        anti_derivations_basis(alg, dmax)?
    } else {
        derivations_basis(alg, dmax)?
    };
    let t = alg
        .table
        .values()
        .flat_map(|e| {
            e.components()
                .map(|(_, p)| p.degree_in(&Var::L))
                .collect::<Vec<_>>()
        })
        .max()
        .unwrap_or(0);
    let mut ans = Ansatz::new();
    let a = ans.elem(&alg.basis, &[Var::D], dmax + t + 1);
    let inner = if anti {
        inner_anti_derivation(alg, &a)?
    } else {
        inner_derivation(alg, &a)?
    };
    let kernel = homogeneous_kernel(&overflow(&inner, dmax), &ans)?;
    let vectors: Vec<Vec<Rational>> = kernel
        .iter()
        .map(|v| coordinates(&inner.specialize(&ans.values(v)), &alg.basis, dmax))
        .collect();
    Ok(all.dimension() - rank(&vectors))
}

/// Maps `f: Q x Q -> R[l]` with entries of degree `<= dmax` satisfying
/// (ts1), and (ts2) as well when `with_ts2` is set.
pub fn twisted_cocycles(
    r: &ConformalAlgebra,
    q: &ConformalAlgebra,
    dmax: u32,
    with_ts2: bool,
) -> Result<SolutionSpace<PairTable>> {
    require_specialized(r)?;
    require_specialized(q)?;
    let mut ans = Ansatz::new();
    let mut f = PairTable::new();
    for x in q.basis.iter() {
        for y in q.basis.iter() {
            f.insert(
                (x.to_string(), y.to_string()),
                ans.elem(&r.basis, &[Var::L, Var::D], dmax),
            );
        }
    }
    let rep = check_twisted(r, q, &f)?;
    let keep = |c: &str| c.starts_with("ts1") || (with_ts2 && c == "ts2");
    let kernel = homogeneous_kernel(&report_residuals(&rep, keep), &ans)?;
    let basis = kernel
        .iter()
        .map(|v| {
            let vals = ans.values(v);
            f.iter()
                .map(|(k, e)| (k.clone(), e.specialize(&vals)))
                .filter(|(_, e)| !e.is_zero())
                .collect()
        })
        .collect();
    Ok(SolutionSpace { basis, bound: dmax })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformal::check_leibniz;
    use crate::corpus;
    use crate::poly::{parse_poly, rat, Context};

    fn poly(s: &str) -> Poly {
        parse_poly(s, &Context::new()).unwrap()
    }

    #[test]
    fn small_kernel() {
        // k0 + k1 = 0, k2 free
        let sys = LinearSystem {
            unknowns: vec!["a".into(), "b".into(), "c".into()],
            rows: vec![vec![rat(1), rat(1), rat(0)], vec![rat(2), rat(2), rat(0)]],
            rhs: vec![rat(0), rat(0)],
        };
        let k = solve_linear(&sys);
        assert_eq!(k.rank, 1);
        assert_eq!(
            k.basis,
            vec![vec![rat(-1), rat(1), rat(0)], vec![rat(0), rat(0), rat(1)]]
        );
        assert!(k.particular.is_some());
    }

    #[test]
    fn inconsistent_system() {
        let sys = LinearSystem {
            unknowns: vec!["a".into()],
            rows: vec![vec![rat(0)]],
            rhs: vec![rat(1)],
        };
        assert!(solve_linear(&sys).particular.is_none());
    }

    #[test]
    fn zero_system_full_space() {
        let sys = LinearSystem::new(vec!["a".into(), "b".into()]);
        assert_eq!(solve_linear(&sys).basis.len(), 2);
    }

    #[test]
    fn nonlinear_is_rejected() {
        let mut ans = Ansatz::new();
        let k = ans.fresh();
        let r = &(&k * &k) * &Poly::l();
        assert!(matches!(
            linearize(&[r], ans.unknowns()),
            Err(Error::Nonlinear(_))
        ));
    }

    #[test]
    fn ex1_centers() {
        let e = corpus::ex1_lw();
        let left = center_basis(&e, Side::Left, 3).unwrap();
        let expect: Vec<ModElem> = ["1", "d", "d^2", "d^3"]
            .iter()
            .map(|s| ModElem::term(poly(s), "W"))
            .collect();
        assert_eq!(left.basis, expect);
        assert_eq!(center_basis(&e, Side::Right, 3).unwrap().dimension(), 0);
        let vir = corpus::virasoro();
        assert_eq!(center_basis(&vir, Side::Left, 3).unwrap().dimension(), 0);
    }

    #[test]
    fn abelian_derivations() {
        let a = corpus::abelian(1);
        // every map with deg_l, deg_d <= 1
        assert_eq!(derivations_basis(&a, 1).unwrap().dimension(), 4);
        assert_eq!(outer_dimension(&a, 0, false).unwrap(), 1);
    }

    #[test]
    fn virasoro_derivations_are_inner() {
        let vir = corpus::virasoro();
        let ders = derivations_basis(&vir, 2).unwrap();
        for d in &ders.basis {
            assert!(check_derivation(&vir, d).passed());
        }
        let ad = inner_derivation(&vir, &ModElem::basis("x")).unwrap();
        let mut vecs: Vec<_> = ders
            .basis
            .iter()
            .map(|d| coordinates(d, &vir.basis, 2))
            .collect();
        let r = rank(&vecs);
        vecs.push(coordinates(&ad, &vir.basis, 2));
        assert_eq!(rank(&vecs), r);
        assert_eq!(outer_dimension(&vir, 2, false).unwrap(), 0);
    }

    #[test]
    fn twisted_over_virasoro_is_trivial() {
        let vir = corpus::virasoro();
        let q = corpus::abelian_named(&["y"]);
        let sols = twisted_cocycles(&vir, &q, 3, false).unwrap();
        assert_eq!(sols.dimension(), 0);
        assert!(check_leibniz(&vir).passed());
    }

    #[test]
    fn params_must_be_specialized() {
        let mut vir = corpus::virasoro();
        vir.params = vec!["a".into()];
        let ctx = vir.context().unwrap();
        vir.set("x", "x", ModElem::parse_in("(d + a*l)*x", &ctx).unwrap())
            .unwrap();
        assert!(matches!(
            center_basis(&vir, Side::Left, 1),
            Err(Error::Unspecialized(_))
        ));
    }
}
