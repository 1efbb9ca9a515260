use crate::error::{Error, Result};
use crate::graph::{scc_decompose, TransferGraph};
use crate::oracle::OracleOptions;
use crate::scheme::Scheme;
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fmt;

#[derive(Clone, Copy, Debug)]
pub struct PowerOptions {
    pub tolerance: f64,
    pub max_iterations: u64,
}

impl Default for PowerOptions {
    fn default() -> Self {
        PowerOptions {
            tolerance: 1e-12,
            max_iterations: 1_000_000,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ComponentEigen {
    pub component: usize,
    pub size: usize,
    pub eigenvalue: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FlexibilityResult {
    pub lambda: f64,
    pub per_component: Vec<ComponentEigen>,
    pub iterations: u64,
    pub tolerance: f64,
    /// Set when lambda is within 1e-9 of an integer.
    pub exact_hint: Option<i64>,
}

fn exact_hint(lambda: f64) -> Option<i64> {
    let nearest = lambda.round();
    if (lambda - nearest).abs() < 1e-9 {
        Some(nearest as i64)
    } else {
        None
    }
}

/// Dominant eigenvalue of the adjacency submatrix of one strongly
/// connected component, by power iteration on `A + I`. The shifted matrix
/// of an SCC is primitive, so the iteration cannot oscillate; subtracting
/// 1 at the end recovers the eigenvalue of `A`.
pub fn component_eigenvalue(
    g: &TransferGraph,
    comp: &[u32],
    opts: PowerOptions,
) -> Result<(f64, u64)> {
    if comp.len() == 1 {
        let id = comp[0];
        let loops = g
            .successors(id)
            .iter()
            .find(|&&(t, _)| t == id)
            .map_or(0, |&(_, m)| m);
        return Ok((loops as f64, 0));
    }

    let local: HashMap<u32, usize> = comp.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let rows: Vec<Vec<(usize, f64)>> = comp
        .iter()
        .map(|&v| {
            g.successors(v)
                .iter()
                .filter_map(|&(t, m)| local.get(&t).map(|&j| (j, m as f64)))
                .collect()
        })
        .collect();

    let n = comp.len();
    let mut v = vec![1.0 / n as f64; n];
    let mut estimate = f64::NAN;
    let mut stable = 0u32;
    for iter in 1..=opts.max_iterations {
        let mut w = vec![0.0f64; n];
        for (i, row) in rows.iter().enumerate() {
            let mut acc = v[i]; // the +I shift
            for &(j, m) in row {
                acc += m * v[j];
            }
            w[i] = acc;
        }
        let sum: f64 = w.iter().sum();
        let mut max_change = 0.0f64;
        for (i, wi) in w.iter().enumerate() {
            let normalized = wi / sum;
            max_change = max_change.max((normalized - v[i]).abs());
            v[i] = normalized;
        }
        let new_estimate = sum; // L1 norm of (A+I)v for a normalized v
        let scale = new_estimate.abs().max(1.0);
        if (new_estimate - estimate).abs() <= opts.tolerance * scale
            && max_change <= opts.tolerance
        {
            stable += 1;
            if stable >= 3 {
                return Ok((new_estimate - 1.0, iter));
            }
        } else {
            stable = 0;
        }
        estimate = new_estimate;
    }
    Err(Error::NoConvergence(opts.max_iterations))
}

/// Flexibility of a graph already in hand: the maximum of the component
/// eigenvalues (0 for an edgeless graph).
pub fn flexibility_of_graph(g: &TransferGraph, opts: PowerOptions) -> Result<FlexibilityResult> {
    let sccs = scc_decompose(g);
    let mut per_component = Vec::with_capacity(sccs.components.len());
    let mut lambda = 0.0f64;
    let mut iterations = 0u64;
    for (idx, comp) in sccs.components.iter().enumerate() {
        let (eig, iters) = component_eigenvalue(g, comp, opts)?;
        iterations = iterations.max(iters);
        lambda = lambda.max(eig);
        per_component.push(ComponentEigen {
            component: idx,
            size: comp.len(),
            eigenvalue: eig,
        });
    }
    Ok(FlexibilityResult {
        lambda,
        per_component,
        iterations,
        tolerance: opts.tolerance,
        exact_hint: exact_hint(lambda),
    })
}

/// Flexibility of a scheme, via its transfer graph. A single-voice scheme
/// short-circuits to 7; anything else goes through the graph.
pub fn flexibility(scheme: &Scheme) -> Result<FlexibilityResult> {
    flexibility_with(scheme, OracleOptions::default(), PowerOptions::default())
}

pub fn flexibility_with(
    scheme: &Scheme,
    oracle: OracleOptions,
    power: PowerOptions,
) -> Result<FlexibilityResult> {
    if scheme.voices().len() == 1 {
        return Ok(FlexibilityResult {
            lambda: 7.0,
            per_component: vec![ComponentEigen {
                component: 0,
                size: 1,
                eigenvalue: 7.0,
            }],
            iterations: 0,
            tolerance: power.tolerance,
            exact_hint: Some(7),
        });
    }
    let g = TransferGraph::build(scheme, oracle)?;
    flexibility_of_graph(&g, power)
}

/// Monic characteristic polynomial with exact integer coefficients,
/// highest degree first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CharPoly {
    pub coefficients: Vec<BigInt>,
}

impl CharPoly {
    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coefficients
            .iter()
            .fold(0.0, |acc, c| acc * x + c.to_f64().unwrap_or(f64::INFINITY))
    }

    /// Largest coefficient magnitude, for scale-aware root checks.
    pub fn magnitude(&self) -> f64 {
        self.coefficients
            .iter()
            .map(|c| c.abs().to_f64().unwrap_or(f64::INFINITY))
            .fold(1.0, f64::max)
    }
}

impl fmt::Display for CharPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.degree();
        let mut first = true;
        for (i, c) in self.coefficients.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let power = n - i;
            let abs = c.abs();
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
                first = false;
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let show_coeff = !abs.is_one() || power == 0;
            if show_coeff {
                write!(f, "{abs}")?;
            }
            match power {
                0 => {}
                1 => write!(f, "x")?,
                _ => write!(f, "x^{power}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// Exact characteristic polynomial of a component's adjacency matrix via
/// the division-free Berkowitz algorithm.
pub fn char_poly(g: &TransferGraph, comp: &[u32], cap: usize) -> Result<CharPoly> {
    if comp.len() > cap {
        return Err(Error::CharPolyCap {
            size: comp.len(),
            cap,
        });
    }
    let local: HashMap<u32, usize> = comp.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let n = comp.len();
    let mut a = vec![vec![BigInt::zero(); n]; n];
    for (i, &v) in comp.iter().enumerate() {
        for &(t, m) in g.successors(v) {
            if let Some(&j) = local.get(&t) {
                a[i][j] = BigInt::from(m);
            }
        }
    }
    Ok(CharPoly {
        coefficients: berkowitz(&a),
    })
}

/// Coefficients of det(xI - A), highest first, by Berkowitz's method:
/// grow the leading principal minor one row at a time, multiplying the
/// coefficient vector by a Toeplitz matrix built from the new border.
fn berkowitz(a: &[Vec<BigInt>]) -> Vec<BigInt> {
    let n = a.len();
    if n == 0 {
        return vec![BigInt::one()];
    }
    let mut coeffs = vec![BigInt::one(), -a[0][0].clone()];
    for i in 1..n {
        // border terms q_t = R M^t S for the i x i principal minor M
        let row: Vec<&BigInt> = (0..i).map(|j| &a[i][j]).collect();
        let col: Vec<&BigInt> = (0..i).map(|j| &a[j][i]).collect();
        let mut m_pow_col: Vec<BigInt> = col.iter().map(|&c| c.clone()).collect();
        let mut q = Vec::with_capacity(i);
        for _ in 0..i {
            let dot: BigInt = row
                .iter()
                .zip(&m_pow_col)
                .map(|(&r, c)| r * c)
                .sum();
            q.push(dot);
            let mut next = vec![BigInt::zero(); i];
            for (r, next_r) in next.iter_mut().enumerate() {
                for k in 0..i {
                    *next_r += &a[r][k] * &m_pow_col[k];
                }
            }
            m_pow_col = next;
        }
        // Toeplitz multiply: out[r] = coeffs[r] - a_ii*coeffs[r-1]
        //                             - sum_t q[t]*coeffs[r-2-t]
        let mut out = vec![BigInt::zero(); coeffs.len() + 1];
        for (r, item) in out.iter_mut().enumerate() {
            if r < coeffs.len() {
                *item += &coeffs[r];
            }
            if r >= 1 && r - 1 < coeffs.len() {
                *item -= &a[i][i] * &coeffs[r - 1];
            }
            for (t, qt) in q.iter().enumerate() {
                if r >= t + 2 && r - t - 2 < coeffs.len() {
                    *item -= qt * &coeffs[r - t - 2];
                }
            }
        }
        coeffs = out;
    }
    coeffs
}
