use num_rational::Ratio;
use num_traits::{One, Signed, Zero};

type Q = Ratio<i64>;

fn q(num: i64, den: i64) -> Q {
    Ratio::new(num, den)
}

/// `constant + p * pi_P + l * pi_L + delta * d`, an exponent of `Mt` in the final bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExponentTerm {
    pub constant: Q,
    pub p: Q,
    pub l: Q,
    pub delta: Q,
}

impl ExponentTerm {
    pub fn new(constant: Q, p: Q, l: Q, delta: Q) -> Self {
        ExponentTerm { constant, p, l, delta }
    }

    pub fn eval(&self, pi_p: Q, pi_l: Q, delta: Q) -> Q {
        self.constant + self.p * pi_p + self.l * pi_l + self.delta * delta
    }

    /// The terms balanced in the final bound, with `P = (Mt)^{pi_P}`, `L = (Mt)^{pi_L}`.
    pub fn standard() -> Vec<ExponentTerm> {
        let z = Q::zero();
        vec![
            ExponentTerm::new(q(1, 2), Q::one(), q(-1, 2), z),
            ExponentTerm::new(q(5, 8), q(1, 4), q(1, 4), z),
            ExponentTerm::new(Q::one(), -Q::one(), z, z),
            ExponentTerm::new(q(3, 4), -Q::one(), Q::one(), q(1, 2)),
            ExponentTerm::new(q(3, 4), z, z, q(-1, 2)),
        ]
    }
}

/// Exact minimizer of the largest exponent term.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExponentSolution {
    pub p_exponent: Q,
    pub l_exponent: Q,
    pub delta: Q,
    pub final_exponent: Q,
    /// Indices of the terms equal to the final exponent at the optimum.
    pub active_terms: Vec<usize>,
    /// Range of `delta` over all optimal vertices; the smallest optimal `delta` is reported,
    /// since a smaller `delta` leaves fewer sum lengths `N` to which the bound must apply.
    pub delta_interval: (Q, Q),
    /// `L < (Mt)^{1/4 - delta/2}` holds strictly at the optimum.
    pub constraint_strict: bool,
}

/// Row `a . (pi_P, pi_L, delta, z) <= b`.
type Row = ([Q; 4], Q);

fn solve4(rows: [&Row; 4]) -> Option<[Q; 4]> {
    let mut a: Vec<[Q; 5]> = rows.iter().map(|(c, b)| [c[0], c[1], c[2], c[3], *b]).collect();
    for col in 0..4 {
        let pivot = (col..4).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        let inv = a[col][col].recip();
        for k in 0..5 {
            a[col][k] *= inv;
        }
        for r in 0..4 {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col];
                for k in 0..5 {
                    let v = a[col][k];
                    a[r][k] -= f * v;
                }
            }
        }
    }
    Some([a[0][4], a[1][4], a[2][4], a[3][4]])
}

/// Minimizes `max_i term_i(pi_P, pi_L, delta)` over `pi_P, pi_L, delta >= 0` with
/// `pi_L <= 1/4 - delta/2`, by enumerating the vertices of the epigraph in exact arithmetic.
pub fn optimize_exponents_with(terms: &[ExponentTerm]) -> ExponentSolution {
    let z = Q::zero();
    let one = Q::one();
    let mut rows: Vec<Row> = terms.iter().map(|t| ([t.p, t.l, t.delta, -one], -t.constant)).collect();
    rows.push(([z, one, q(1, 2), z], q(1, 4)));
    rows.push(([-one, z, z, z], z));
    rows.push(([z, -one, z, z], z));
    rows.push(([z, z, -one, z], z));
    let feasible = |x: &[Q; 4]| {
        rows.iter()
            .all(|(a, b)| a.iter().zip(x).map(|(c, v)| *c * *v).sum::<Q>() <= *b)
    };
    let n = rows.len();
    let mut vertices: Vec<[Q; 4]> = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                for l in k + 1..n {
                    let Some(x) = solve4([&rows[i], &rows[j], &rows[k], &rows[l]]) else {
                        continue;
                    };
                    if !feasible(&x) {
                        continue;
                    }
                    vertices.push(x);
                }
            }
        }
    }
    let optimum = vertices
        .iter()
        .map(|x| x[3])
        .min()
        .expect("the feasible region has a vertex");
    let mut optimal: Vec<[Q; 4]> = vertices.into_iter().filter(|x| x[3] == optimum).collect();
    optimal.sort_by(|a, b| (a[2], a[1], a[0]).cmp(&(b[2], b[1], b[0])));
    let x = optimal[0];
    let delta_interval = (x[2], optimal.last().expect("nonempty")[2]);
    let active_terms = terms
        .iter()
        .enumerate()
        .filter(|(_, t)| t.eval(x[0], x[1], x[2]) == x[3])
        .map(|(i, _)| i)
        .collect();
    ExponentSolution {
        p_exponent: x[0],
        l_exponent: x[1],
        delta: x[2],
        final_exponent: x[3],
        active_terms,
        delta_interval,
        constraint_strict: (x[1] + x[2] / 2 - q(1, 4)).is_negative(),
    }
}

/// The optimum for the standard terms: `P = (Mt)^{5/18}`, `L = (Mt)^{1/9}`, `delta = 1/18`,
/// final exponent `13/18`.
pub fn optimize_exponents() -> ExponentSolution {
    optimize_exponents_with(&ExponentTerm::standard())
}
