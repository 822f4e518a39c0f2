//! Blockwise adaptive Nesterov-accelerated gradient descent.
//!
//! Placement variables split into four blocks (movable x/y, filler x/y),
//! each with an independent Barzilai-Borwein step size, truncated against a
//! geometry-derived reference step and scaled by a global cosine-annealed
//! factor. The projection hook runs on the reference solution after the
//! extrapolation, and the next gradient is taken at the projected point.
//! Single-block and fixed-step variants plus Adam serve as ablation
//! baselines.

use std::ops::Range;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OptKind {
    Bnag,
    NagBb,
    Nag,
    Adam,
}

#[derive(Debug, thiserror::Error)]
#[error("non-finite value encountered at iteration {iter}")]
pub struct Diverged {
    pub iter: usize,
}

/// Raw Barzilai-Borwein rule with the positivity fallback.
pub fn bb_step(s: &[f64], y: &[f64], prev_alpha: f64) -> f64 {
    let yy: f64 = y.iter().map(|v| v * v).sum();
    if yy.sqrt() < 1e-12 {
        return prev_alpha;
    }
    let sy: f64 = s.iter().zip(y).map(|(a, b)| a * b).sum();
    let alpha_bb = sy / yy;
    if alpha_bb > 0.0 {
        alpha_bb
    } else {
        let ss: f64 = s.iter().map(|v| v * v).sum();
        let alpha_lip = (ss / yy).sqrt();
        alpha_lip.min(prev_alpha)
    }
}

/// Momentum recurrence.
pub fn next_momentum(a: f64) -> f64 {
    (1.0 + (4.0 * a * a + 1.0).sqrt()) / 2.0
}

/// Cosine-annealed global step scale, eta0 at k = 0 down to eta_min at k_max.
pub fn anneal(k: usize, eta0: f64, eta_min: f64, k_max: usize) -> f64 {
    let phase = (std::f64::consts::PI * k as f64 / k_max.max(1) as f64).cos();
    eta_min + 0.5 * (eta0 - eta_min) * (1.0 + phase)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum StepRule {
    BarzilaiBorwein,
    /// Inverse local Lipschitz estimate, no safeguards.
    Lipschitz,
}

#[derive(Clone, Debug)]
pub struct NesterovConfig {
    pub blocks: Vec<Range<usize>>,
    rule: StepRule,
    annealing: bool,
    pub eta0: f64,
    pub eta_min: f64,
    pub k_max: usize,
    /// Reference length scale (bin size); bootstrap and truncation anchor.
    pub ref_scale: f64,
    truncate: bool,
}

impl NesterovConfig {
    pub fn bnag(blocks: Vec<Range<usize>>, eta0: f64, eta_min: f64, k_max: usize, ref_scale: f64) -> Self {
        NesterovConfig { blocks, rule: StepRule::BarzilaiBorwein, annealing: true, eta0, eta_min, k_max, ref_scale, truncate: true }
    }

    /// Single-block BB-stepped Nesterov without annealing.
    pub fn nag_bb(dim: usize, k_max: usize, ref_scale: f64) -> Self {
        NesterovConfig {
            blocks: vec![0..dim],
            rule: StepRule::BarzilaiBorwein,
            annealing: false,
            eta0: 1.0,
            eta_min: 1.0,
            k_max,
            ref_scale,
            truncate: true,
        }
    }

    /// Plain Nesterov with per-iteration inverse-Lipschitz steps: single
    /// block, no positivity fallback, no truncation, no annealing.
    pub fn nag(dim: usize, k_max: usize, ref_scale: f64) -> Self {
        NesterovConfig {
            blocks: vec![0..dim],
            rule: StepRule::Lipschitz,
            annealing: false,
            eta0: 1.0,
            eta_min: 1.0,
            k_max,
            ref_scale,
            truncate: false,
        }
    }

    /// Regression harness configuration: no annealing, no truncation.
    pub fn plain_bb(dim: usize, k_max: usize) -> Self {
        NesterovConfig {
            blocks: vec![0..dim],
            rule: StepRule::BarzilaiBorwein,
            annealing: false,
            eta0: 1.0,
            eta_min: 1.0,
            k_max,
            ref_scale: 1.0,
            truncate: false,
        }
    }
}

const ALPHA_LO_FACTOR: f64 = 1e-6;
const ALPHA_HI_FACTOR: f64 = 1e3;

pub struct Nesterov {
    cfg: NesterovConfig,
    pub u: Vec<f64>,
    v: Vec<f64>,
    v_prev: Vec<f64>,
    g: Vec<f64>,
    g_prev: Vec<f64>,
    a: f64,
    alpha: Vec<f64>,
    alpha_ref: Vec<f64>,
    k: usize,
}

impl Nesterov {
    /// Bootstrap from the initial point: the reference solution starts at
    /// `x0` and the per-block step is the reference length over the block
    /// gradient RMS.
    pub fn new(
        x0: Vec<f64>,
        cfg: NesterovConfig,
        eval: &mut dyn FnMut(&[f64], &mut [f64]) -> f64,
    ) -> Result<Self, Diverged> {
        let mut g = vec![0.0; x0.len()];
        eval(&x0, &mut g);
        if g.iter().any(|v| !v.is_finite()) {
            return Err(Diverged { iter: 0 });
        }
        let alpha_ref: Vec<f64> = cfg
            .blocks
            .iter()
            .map(|b| {
                let len = (b.end - b.start).max(1) as f64;
                let rms = (g[b.clone()].iter().map(|v| v * v).sum::<f64>() / len).sqrt();
                if rms > 1e-12 {
                    cfg.ref_scale / rms
                } else {
                    cfg.ref_scale
                }
            })
            .collect();
        Ok(Nesterov {
            u: x0.clone(),
            v: x0.clone(),
            v_prev: x0,
            g_prev: g.clone(),
            g,
            a: 1.0,
            alpha: alpha_ref.clone(),
            alpha_ref,
            cfg,
            k: 0,
        })
    }

    pub fn iteration(&self) -> usize {
        self.k
    }

    /// Major solution.
    pub fn positions(&self) -> &[f64] {
        &self.u
    }

    pub fn step(
        &mut self,
        eval: &mut dyn FnMut(&[f64], &mut [f64]) -> f64,
        project: &mut dyn FnMut(&mut [f64]),
    ) -> Result<(), Diverged> {
        let eta = if self.cfg.annealing {
            anneal(self.k, self.cfg.eta0, self.cfg.eta_min, self.cfg.k_max)
        } else {
            1.0
        };
        let nblocks = self.cfg.blocks.len();
        for j in 0..nblocks {
            let b = self.cfg.blocks[j].clone();
            let next = if self.k == 0 {
                self.alpha_ref[j]
            } else {
                let s: Vec<f64> = self.v[b.clone()]
                    .iter()
                    .zip(&self.v_prev[b.clone()])
                    .map(|(a, b)| a - b)
                    .collect();
                let y: Vec<f64> = self.g[b.clone()]
                    .iter()
                    .zip(&self.g_prev[b.clone()])
                    .map(|(a, b)| a - b)
                    .collect();
                match self.cfg.rule {
                    StepRule::Lipschitz => {
                        let yy = y.iter().map(|v| v * v).sum::<f64>().sqrt();
                        if yy < 1e-12 {
                            self.alpha[j]
                        } else {
                            let ss = s.iter().map(|v| v * v).sum::<f64>().sqrt();
                            ss / yy
                        }
                    }
                    StepRule::BarzilaiBorwein => {
                        let mut alpha = bb_step(&s, &y, self.alpha[j]);
                        if self.cfg.truncate {
                            alpha = alpha.clamp(
                                ALPHA_LO_FACTOR * self.alpha_ref[j],
                                ALPHA_HI_FACTOR * self.alpha_ref[j],
                            );
                        }
                        alpha
                    }
                }
            };
            self.alpha[j] = next * eta;
        }

        let mut u_next = vec![0.0; self.u.len()];
        for (j, b) in self.cfg.blocks.iter().enumerate() {
            for i in b.clone() {
                u_next[i] = self.v[i] - self.alpha[j] * self.g[i];
            }
        }
        let a_next = next_momentum(self.a);
        let coef = (self.a - 1.0) / a_next;
        let mut v_next: Vec<f64> = u_next
            .iter()
            .zip(&self.u)
            .map(|(un, u)| un + coef * (un - u))
            .collect();
        project(&mut v_next);
        if v_next.iter().any(|v| !v.is_finite()) {
            return Err(Diverged { iter: self.k });
        }
        std::mem::swap(&mut self.g_prev, &mut self.g);
        eval(&v_next, &mut self.g);
        if self.g.iter().any(|v| !v.is_finite()) {
            return Err(Diverged { iter: self.k });
        }
        self.v_prev = std::mem::replace(&mut self.v, v_next);
        self.u = u_next;
        self.a = a_next;
        self.k += 1;
        Ok(())
    }
}

pub struct Adam {
    pub x: Vec<f64>,
    g: Vec<f64>,
    m1: Vec<f64>,
    m2: Vec<f64>,
    lr: f64,
    k: usize,
}

impl Adam {
    pub fn new(
        x0: Vec<f64>,
        lr: f64,
        eval: &mut dyn FnMut(&[f64], &mut [f64]) -> f64,
    ) -> Result<Self, Diverged> {
        let mut g = vec![0.0; x0.len()];
        eval(&x0, &mut g);
        if g.iter().any(|v| !v.is_finite()) {
            return Err(Diverged { iter: 0 });
        }
        let n = x0.len();
        Ok(Adam { x: x0, g, m1: vec![0.0; n], m2: vec![0.0; n], lr, k: 0 })
    }

    pub fn positions(&self) -> &[f64] {
        &self.x
    }

    pub fn step(
        &mut self,
        eval: &mut dyn FnMut(&[f64], &mut [f64]) -> f64,
        project: &mut dyn FnMut(&mut [f64]),
    ) -> Result<(), Diverged> {
        const B1: f64 = 0.9;
        const B2: f64 = 0.999;
        const EPS: f64 = 1e-8;
        let t = (self.k + 1) as f64;
        for i in 0..self.x.len() {
            self.m1[i] = B1 * self.m1[i] + (1.0 - B1) * self.g[i];
            self.m2[i] = B2 * self.m2[i] + (1.0 - B2) * self.g[i] * self.g[i];
            let mh = self.m1[i] / (1.0 - B1.powf(t));
            let vh = self.m2[i] / (1.0 - B2.powf(t));
            self.x[i] -= self.lr * mh / (vh.sqrt() + EPS);
        }
        project(&mut self.x);
        if self.x.iter().any(|v| !v.is_finite()) {
            return Err(Diverged { iter: self.k });
        }
        eval(&self.x.clone(), &mut self.g);
        if self.g.iter().any(|v| !v.is_finite()) {
            return Err(Diverged { iter: self.k });
        }
        self.k += 1;
        Ok(())
    }
}

/// Uniform front end over the optimizer variants.
pub enum Optimizer {
    Nesterov(Nesterov),
    Adam(Adam),
}

impl Optimizer {
    pub fn new(
        kind: OptKind,
        x0: Vec<f64>,
        blocks: Vec<Range<usize>>,
        eta0: f64,
        eta_min: f64,
        k_max: usize,
        ref_scale: f64,
        eval: &mut dyn FnMut(&[f64], &mut [f64]) -> f64,
    ) -> Result<Self, Diverged> {
        let dim = x0.len();
        match kind {
            OptKind::Bnag => Ok(Optimizer::Nesterov(Nesterov::new(
                x0,
                NesterovConfig::bnag(blocks, eta0, eta_min, k_max, ref_scale),
                eval,
            )?)),
            OptKind::NagBb => Ok(Optimizer::Nesterov(Nesterov::new(
                x0,
                NesterovConfig::nag_bb(dim, k_max, ref_scale),
                eval,
            )?)),
            OptKind::Nag => Ok(Optimizer::Nesterov(Nesterov::new(
                x0,
                NesterovConfig::nag(dim, k_max, ref_scale),
                eval,
            )?)),
            OptKind::Adam => Ok(Optimizer::Adam(Adam::new(x0, ref_scale, eval)?)),
        }
    }

    pub fn positions(&self) -> &[f64] {
        match self {
            Optimizer::Nesterov(n) => n.positions(),
            Optimizer::Adam(a) => a.positions(),
        }
    }

    pub fn step(
        &mut self,
        eval: &mut dyn FnMut(&[f64], &mut [f64]) -> f64,
        project: &mut dyn FnMut(&mut [f64]),
    ) -> Result<(), Diverged> {
        match self {
            Optimizer::Nesterov(n) => n.step(eval, project),
            Optimizer::Adam(a) => a.step(eval, project),
        }
    }
}
