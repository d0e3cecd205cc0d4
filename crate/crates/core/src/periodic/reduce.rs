//! Front ends that turn other problem classes into semi-explicit systems.

use crate::dae::SystemDef;
use crate::degree::{pair_degree, DegreeMethod, DegreeOptions, PairDegreeReport};
use crate::error::{Error, Result};
use crate::expr::{parse, system_vars, var_list, Expression};
use crate::region::Region;

fn parse_all(src: &[&str], vars: &std::sync::Arc<[String]>) -> Result<Vec<Expression>> {
    src.iter()
        .map(|s| parse(s, vars.clone()).map_err(Error::from))
        .collect()
}

/// An index-2 problem `ẋ = f(x, y) + λh(t, x, y)`, `γ(x) = 0`.
#[derive(Clone, Debug)]
pub struct HessenbergProblem<'a> {
    pub k: usize,
    pub s: usize,
    pub f: &'a [&'a str],
    pub gamma: &'a [&'a str],
    /// Empty for no forcing.
    pub h: &'a [&'a str],
    pub period: f64,
    pub region: Region,
}

/// Index reduction: the hidden constraint `g = dγ(x)[f(x, y)]` replaces
/// `γ`. The produced system is validated.
pub fn reduce_hessenberg(problem: &HessenbergProblem, samples: usize) -> Result<SystemDef> {
    let HessenbergProblem {
        k,
        s,
        f,
        gamma,
        h,
        period,
        ..
    } = *problem;
    let vars = system_vars(k, s);
    let f_exprs = parse_all(f, &vars)?;
    let gamma = parse_all(gamma, &vars)?;
    if gamma.len() != s {
        return Err(Error::InvalidSystem(format!(
            "expected {s} γ formulas, got {}",
            gamma.len()
        )));
    }
    if f_exprs.len() != k {
        return Err(Error::InvalidSystem(format!(
            "expected {k} f formulas, got {}",
            f_exprs.len()
        )));
    }
    for (i, gi) in gamma.iter().enumerate() {
        let bad = std::iter::once(0)
            .chain(1 + k..1 + k + s)
            .find(|&slot| gi.uses_slot(slot));
        if let Some(slot) = bad {
            return Err(Error::InvalidSystem(format!(
                "γ{} depends on '{}'; it may only depend on x",
                i + 1,
                vars[slot]
            )));
        }
    }
    let g: Vec<Expression> = gamma
        .iter()
        .map(|gi| {
            (0..k)
                .map(|j| gi.symbolic_diff_slot(1 + j).mul(&f_exprs[j]))
                .reduce(|a, b| a.add(&b))
                .expect("k > 0")
        })
        .collect();
    let h_exprs = if h.is_empty() {
        (0..k).map(|_| Expression::constant(vars.clone(), 0.0)).collect()
    } else {
        parse_all(h, &vars)?
    };
    let sys = SystemDef::new(k, s, period, f_exprs, g, h_exprs, problem.region.clone())?;
    sys.validate(samples)?;
    Ok(sys)
}

#[derive(Clone, Debug)]
pub struct ImplicitReduction {
    pub system: SystemDef,
    pub degree: PairDegreeReport,
}

/// `φ(x, ẋ + λh(t, x)) = 0` as `ẋ = y - λh`, `φ(x, y) = 0`. The formulas use
/// `x1..xk` for the state and `y1..yk` for the shifted velocity.
pub fn reduce_implicit(
    phi: &[&str],
    h: &[&str],
    period: f64,
    region: Region,
    method: &dyn DegreeMethod,
    opts: &DegreeOptions,
) -> Result<ImplicitReduction> {
    let k = phi.len();
    if k == 0 {
        return Err(Error::InvalidSystem("φ needs at least one component".into()));
    }
    let vars = system_vars(k, k);
    let g = parse_all(phi, &vars)?;
    let f: Vec<Expression> = (0..k)
        .map(|i| parse(&format!("y{}", i + 1), vars.clone()).map_err(Error::from))
        .collect::<Result<_>>()?;
    let h_exprs: Vec<Expression> = if h.is_empty() {
        (0..k).map(|_| Expression::constant(vars.clone(), 0.0)).collect()
    } else {
        parse_all(h, &vars)?.iter().map(Expression::neg).collect()
    };
    let system = SystemDef::new(k, k, period, f, g, h_exprs, region.clone())?;
    system.validate(opts.samples)?;

    let names: Vec<String> = (1..=k)
        .map(|i| format!("x{i}"))
        .chain((1..=k).map(|i| format!("y{i}")))
        .collect();
    let omega = parse_all(phi, &var_list(names))?;
    let degree = pair_degree(&omega, &region, method, opts)?;
    Ok(ImplicitReduction { system, degree })
}
