//! Simulation kernel. Everything runs in the X frame (all operators
//! conjugated by `H^⊗m`), where the signal is diagonal, Z errors are bit
//! flips and syndrome projectors are diagonal, so the Kraus operators are
//! extremely sparse.

use num_complex::Complex64 as C;
use rand::Rng;

use crate::linalg::OperatorMatrix;

const DROP: f64 = 1e-13;

/// Row-sparse square operator.
#[derive(Debug, Clone)]
pub(crate) struct SparseOp {
    pub(crate) rows: Vec<Vec<(usize, C)>>,
}

impl SparseOp {
    pub(crate) fn from_dense(m: &OperatorMatrix<f64>) -> Self {
        let d = m.dim();
        let rows = (0..d)
            .map(|i| {
                (0..d)
                    .filter_map(|j| {
                        let v = m[(i, j)];
                        (v.norm() > DROP).then_some((j, v))
                    })
                    .collect()
            })
            .collect();
        Self { rows }
    }

    /// `|a⟩ ↦ w·s(a)|π(a)⟩`.
    pub(crate) fn monomial(d: usize, weight: f64, map: impl Fn(usize) -> (usize, f64)) -> Self {
        let mut rows = vec![Vec::new(); d];
        for a in 0..d {
            let (b, s) = map(a);
            if (weight * s).abs() > DROP {
                rows[b].push((a, C::new(weight * s, 0.0)));
            }
        }
        Self { rows }
    }

    pub(crate) fn dim(&self) -> usize {
        self.rows.len()
    }

    pub(crate) fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub(crate) fn apply(&self, v: &[C], out: &mut [C]) {
        for (o, row) in out.iter_mut().zip(&self.rows) {
            *o = row.iter().map(|&(j, k)| k * v[j]).sum();
        }
    }

    /// `out += K ρ K†` on row-major `ρ`.
    pub(crate) fn sandwich_add(&self, rho: &[C], out: &mut [C]) {
        let d = self.dim();
        // tmp = K ρ, sparse rows
        let mut tmp = vec![C::new(0.0, 0.0); d * d];
        for (a, row) in self.rows.iter().enumerate() {
            if row.is_empty() {
                continue;
            }
            let t = &mut tmp[a * d..(a + 1) * d];
            for &(i, k) in row {
                let r = &rho[i * d..(i + 1) * d];
                for (tj, rj) in t.iter_mut().zip(r) {
                    *tj += k * rj;
                }
            }
        }
        // out[a][b] += Σ_j tmp[a][j] conj(K[b][j])
        for a in 0..d {
            let t = &tmp[a * d..(a + 1) * d];
            if t.iter().all(|x| x.re == 0.0 && x.im == 0.0) {
                continue;
            }
            for (b, row) in self.rows.iter().enumerate() {
                let s: C = row.iter().map(|&(j, k)| t[j] * k.conj()).sum();
                out[a * d + b] += s;
            }
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) enum Stage {
    /// Diagonal unitary.
    Phase(Vec<C>),
    /// Kraus set.
    Kraus(Vec<SparseOp>),
}

impl Stage {
    fn apply_density(&self, rho: &mut Vec<C>, d: usize) {
        match self {
            Stage::Phase(u) => {
                for a in 0..d {
                    for b in 0..d {
                        rho[a * d + b] *= u[a] * u[b].conj();
                    }
                }
            }
            Stage::Kraus(ks) => {
                let mut out = vec![C::new(0.0, 0.0); d * d];
                for k in ks {
                    k.sandwich_add(rho, &mut out);
                }
                *rho = out;
            }
        }
    }

    fn apply_state(&self, psi: &mut [C], rng: &mut impl Rng, scratch: &mut [C]) {
        match self {
            Stage::Phase(u) => psi.iter_mut().zip(u).for_each(|(x, p)| *x *= p),
            Stage::Kraus(ks) => {
                let mut draw: f64 = rng.random();
                let total: f64 = psi.iter().map(|x| x.norm_sqr()).sum();
                draw *= total;
                let last = ks.len() - 1;
                for (i, k) in ks.iter().enumerate() {
                    k.apply(psi, scratch);
                    let w: f64 = scratch.iter().map(|x| x.norm_sqr()).sum();
                    if (draw < w || i == last) && w > 0.0 {
                        let s = (total / w).sqrt();
                        for (p, x) in psi.iter_mut().zip(scratch.iter()) {
                            *p = x * s;
                        }
                        return;
                    }
                    draw -= w;
                }
            }
        }
    }

    fn cost(&self, d: usize) -> usize {
        match self {
            Stage::Phase(_) => d * d,
            Stage::Kraus(ks) => ks.iter().map(|k| k.nnz() * k.nnz() + d * d).sum(),
        }
    }
}

/// One fully specified run: the initial state, the per-segment stage list
/// repeated `segments` times, and the `P₊` readout.
#[derive(Debug, Clone)]
pub(crate) struct Circuit {
    pub(crate) qubits: usize,
    pub(crate) init: Vec<C>,
    pub(crate) segment: Vec<Stage>,
    pub(crate) segments: usize,
}

impl Circuit {
    pub(crate) fn dim(&self) -> usize {
        1 << self.qubits
    }

    fn run_segment(&self, rho: &mut Vec<C>) {
        let d = self.dim();
        for s in &self.segment {
            s.apply_density(rho, d);
        }
    }

    /// Final density matrix (row-major).
    pub(crate) fn final_density(&self) -> Vec<C> {
        let d = self.dim();
        let mut rho: Vec<C> = (0..d * d)
            .map(|ab| self.init[ab / d] * self.init[ab % d].conj())
            .collect();
        let seg_cost: usize = self.segment.iter().map(|s| s.cost(d)).sum::<usize>().max(1);
        let big = (d * d) as f64;
        let direct = self.segments as f64 * seg_cost as f64;
        let powering = big * seg_cost as f64 + 2.0 * (self.segments as f64).log2().ceil() * big * big * big;
        if self.segments > 1 && powering < direct {
            let s = self.superoperator();
            rho = power_apply(&s, d * d, self.segments, &rho);
        } else {
            for _ in 0..self.segments {
                self.run_segment(&mut rho);
            }
        }
        rho
    }

    fn superoperator(&self) -> Vec<C> {
        let dd = self.dim() * self.dim();
        let mut s = vec![C::new(0.0, 0.0); dd * dd];
        for col in 0..dd {
            let mut e = vec![C::new(0.0, 0.0); dd];
            e[col] = C::new(1.0, 0.0);
            self.run_segment(&mut e);
            for (row, v) in e.into_iter().enumerate() {
                s[row * dd + col] = v;
            }
        }
        s
    }

    pub(crate) fn p_plus_exact(&self) -> f64 {
        p_plus_density(&self.final_density(), self.dim())
    }

    /// One quantum trajectory; returns the final `P₊` of the sampled pure
    /// state (the caller samples the outcome).
    pub(crate) fn trajectory_p_plus(&self, rng: &mut impl Rng) -> f64 {
        let mut psi = self.init.clone();
        let mut scratch = vec![C::new(0.0, 0.0); psi.len()];
        for _ in 0..self.segments {
            for s in &self.segment {
                s.apply_state(&mut psi, rng, &mut scratch);
            }
        }
        p_plus_state(&psi)
    }
}

fn matmul(a: &[C], b: &[C], n: usize) -> Vec<C> {
    let mut out = vec![C::new(0.0, 0.0); n * n];
    for i in 0..n {
        let o = &mut out[i * n..(i + 1) * n];
        for k in 0..n {
            let x = a[i * n + k];
            if x.re == 0.0 && x.im == 0.0 {
                continue;
            }
            for (oj, bj) in o.iter_mut().zip(&b[k * n..(k + 1) * n]) {
                *oj += x * bj;
            }
        }
    }
    out
}

fn matvec(a: &[C], v: &[C], n: usize) -> Vec<C> {
    (0..n)
        .map(|i| a[i * n..(i + 1) * n].iter().zip(v).map(|(x, y)| x * y).sum())
        .collect()
}

fn power_apply(s: &[C], n: usize, mut e: usize, v: &[C]) -> Vec<C> {
    let mut base = s.to_vec();
    let mut out = v.to_vec();
    while e > 0 {
        if e & 1 == 1 {
            out = matvec(&base, &out, n);
        }
        e >>= 1;
        if e > 0 {
            base = matmul(&base, &base, n);
        }
    }
    out
}

/// `P₊ = Σ_{c₁=0} ½(ρ_cc + ρ_c̄c̄ + 2 Re ρ_cc̄)`, the probability that the
/// decoded logical qubit reads `+`.
pub(crate) fn p_plus_density(rho: &[C], d: usize) -> f64 {
    let mask = d - 1;
    (0..d / 2)
        .map(|c| {
            let cb = c ^ mask;
            0.5 * (rho[c * d + c].re + rho[cb * d + cb].re + 2.0 * rho[c * d + cb].re)
        })
        .sum()
}

pub(crate) fn p_plus_state(psi: &[C]) -> f64 {
    let d = psi.len();
    let mask = d - 1;
    let norm: f64 = psi.iter().map(|x| x.norm_sqr()).sum();
    (0..d / 2).map(|c| 0.5 * (psi[c] + psi[c ^ mask]).norm_sqr()).sum::<f64>() / norm
}

/// Bit of qubit `q` (1-based, qubit 1 most significant) in `x`.
#[inline]
pub(crate) fn bit(x: usize, q: usize, m: usize) -> usize {
    (x >> (m - q)) & 1
}

#[inline]
pub(crate) fn flip_mask(q: usize, m: usize) -> usize {
    1 << (m - q)
}

/// `exp(−i (ω/2) h Σ_data X_i)` in the frame.
pub(crate) fn signal_phase(omega: f64, h: f64, data: &[usize], m: usize) -> Stage {
    let d = 1 << m;
    Stage::Phase(
        (0..d)
            .map(|x| {
                let s: f64 = data.iter().map(|&q| 1.0 - 2.0 * bit(x, q, m) as f64).sum();
                C::from_polar(1.0, -0.5 * omega * h * s)
            })
            .collect(),
    )
}

/// `{√(1−p) I, √p Z_q}`: Z is a bit flip in the frame.
pub(crate) fn z_flip(p: f64, q: usize, m: usize) -> Stage {
    let d = 1 << m;
    let f = flip_mask(q, m);
    Stage::Kraus(vec![
        SparseOp::monomial(d, (1.0 - p).sqrt(), |a| (a, 1.0)),
        SparseOp::monomial(d, p.sqrt(), |a| (a ^ f, 1.0)),
    ])
}

/// `{√(1−Np) I, √p Z_i}` over the data qubits.
pub(crate) fn collective_z(p: f64, data: &[usize], m: usize) -> Stage {
    let d = 1 << m;
    let mut ks = vec![SparseOp::monomial(d, (1.0 - data.len() as f64 * p).max(0.0).sqrt(), |a| (a, 1.0))];
    for &q in data {
        let f = flip_mask(q, m);
        ks.push(SparseOp::monomial(d, p.sqrt(), |a| (a ^ f, 1.0)));
    }
    Stage::Kraus(ks)
}

/// `{√(1−p) I, √p X_q}`: X is a sign in the frame.
pub(crate) fn x_sign(p: f64, q: usize, m: usize) -> Stage {
    let d = 1 << m;
    Stage::Kraus(vec![
        SparseOp::monomial(d, (1.0 - p).sqrt(), |a| (a, 1.0)),
        SparseOp::monomial(d, p.sqrt(), |a| (a, 1.0 - 2.0 * bit(a, q, m) as f64)),
    ])
}

/// Amplitude damping on qubit `q`, conjugated into the frame.
pub(crate) fn emission(p: f64, q: usize, m: usize) -> Stage {
    let s = (1.0 - p).sqrt();
    let e0 = [[0.5 * (1.0 + s), 0.5 * (1.0 - s)], [0.5 * (1.0 - s), 0.5 * (1.0 + s)]];
    let r = 0.5 * p.sqrt();
    // H |0⟩⟨1| H = ½ [[1, −1], [1, −1]]
    let e1 = [[r, -r], [r, -r]];
    Stage::Kraus(vec![local(&e0, q, m), local(&e1, q, m)])
}

fn local(g: &[[f64; 2]; 2], q: usize, m: usize) -> SparseOp {
    let d = 1 << m;
    let f = flip_mask(q, m);
    let rows = (0..d)
        .map(|a| {
            let ba = bit(a, q, m);
            [(a & !f, 0usize), (a | f, 1usize)]
                .into_iter()
                .filter_map(|(col, bc)| {
                    let v = g[ba][bc];
                    (v.abs() > DROP).then_some((col, C::new(v, 0.0)))
                })
                .collect()
        })
        .collect();
    SparseOp { rows }
}

/// Frame image `W K W` of a computational-basis operator, `W = H^⊗m`.
pub(crate) fn to_frame(k: &OperatorMatrix<f64>) -> OperatorMatrix<f64> {
    let d = k.dim();
    let norm = 1.0 / d as f64;
    let sign = |a: usize, b: usize| if (a & b).count_ones().is_multiple_of(2) { 1.0 } else { -1.0 };
    // W K W = (1/d) Σ_ij s(a,i) K_ij s(j,b)
    let mut half = OperatorMatrix::zeros(d);
    for a in 0..d {
        for j in 0..d {
            let v: C = (0..d).map(|i| k[(i, j)] * sign(a, i)).sum();
            half[(a, j)] = v;
        }
    }
    OperatorMatrix::from_fn(d, |a, b| (0..d).map(|j| half[(a, j)] * sign(j, b)).sum::<C>() * norm)
}

/// Pauli `σ` on data qubit `q`, in the frame.
pub(crate) fn pauli_frame(sigma: char, q: usize, m: usize, weight: f64) -> SparseOp {
    let d = 1 << m;
    let f = flip_mask(q, m);
    match sigma {
        'I' => SparseOp::monomial(d, weight, |a| (a, 1.0)),
        'Z' => SparseOp::monomial(d, weight, |a| (a ^ f, 1.0)),
        'X' => SparseOp::monomial(d, weight, |a| (a, 1.0 - 2.0 * bit(a, q, m) as f64)),
        // Y = iXZ; the global phase drops out of every sandwich
        _ => SparseOp::monomial(d, weight, |a| (a ^ f, 1.0 - 2.0 * bit(a, q, m) as f64)),
    }
}

/// `64`-bit mixing used to derive per-repetition RNG streams.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of repetition `index` under `master`:
/// `splitmix64(master ^ splitmix64(index))`.
pub fn stream_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index))
}
