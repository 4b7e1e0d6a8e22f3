//! Byzantine vector-crafting strategies and the greedy scale search used to
//! tune them against a given aggregator.

use crate::error::{Error, Result};

/// Which strategy the Byzantine nodes follow.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttackKind {
    None,
    /// Send (1 - tau) times the honest mean.
    Foe,
    /// Send mean + tau times the coordinate-wise standard deviation.
    Alie,
    /// Train honestly on label-flipped data.
    LabelFlip,
    /// Copy the honest vector singled out by a power-iteration heuristic.
    Mimic,
}

impl AttackKind {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "none" => AttackKind::None,
            "foe" => AttackKind::Foe,
            "alie" => AttackKind::Alie,
            "labelflip" => AttackKind::LabelFlip,
            "mimic" => AttackKind::Mimic,
            other => return Err(Error::Config(format!("unknown attack '{other}'"))),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            AttackKind::None => "none",
            AttackKind::Foe => "foe",
            AttackKind::Alie => "alie",
            AttackKind::LabelFlip => "labelflip",
            AttackKind::Mimic => "mimic",
        }
    }
}

/// Attack configuration: the strategy plus the scale candidates searched
/// each step for the scaled attacks.
#[derive(Debug, Clone)]
pub struct AttackSpec {
    pub kind: AttackKind,
    /// Candidate tau values; must be non-empty for Foe/Alie.
    pub tau_grid: Vec<f64>,
    /// Fixed tau overriding the grid search, if set.
    pub fixed_tau: Option<f64>,
}

/// Default tau grid: 41 equispaced points in [-10, 10].
pub fn default_tau_grid() -> Vec<f64> {
    (0..41).map(|i| -10.0 + 0.5 * i as f64).collect()
}

impl AttackSpec {
    pub fn new(kind: AttackKind, tau_grid: Vec<f64>, fixed_tau: Option<f64>) -> Result<Self> {
        if matches!(kind, AttackKind::Foe | AttackKind::Alie)
            && fixed_tau.is_none()
            && tau_grid.is_empty()
        {
            return Err(Error::Config("tau grid must be non-empty".into()));
        }
        Ok(AttackSpec {
            kind,
            tau_grid,
            fixed_tau,
        })
    }
}

fn mean(honest: &[Vec<f64>]) -> Result<Vec<f64>> {
    if honest.is_empty() {
        return Err(Error::EmptyInput);
    }
    let dim = honest[0].len();
    let mut out = vec![0.0; dim];
    for v in honest {
        for (o, &x) in out.iter_mut().zip(v) {
            *o += x;
        }
    }
    let n = honest.len() as f64;
    out.iter_mut().for_each(|o| *o /= n);
    Ok(out)
}

/// "Fall of empires" style scaling: (1 - tau) * mean(honest). tau = 2 is
/// sign flipping.
pub fn foe(honest: &[Vec<f64>], tau: f64) -> Result<Vec<f64>> {
    let mut v = mean(honest)?;
    v.iter_mut().for_each(|x| *x *= 1.0 - tau);
    Ok(v)
}

/// "A little is enough" style shift: mean + tau * sigma, with sigma the
/// coordinate-wise population standard deviation (divide by count).
pub fn alie(honest: &[Vec<f64>], tau: f64) -> Result<Vec<f64>> {
    let mu = mean(honest)?;
    let n = honest.len() as f64;
    let dim = mu.len();
    let mut var = vec![0.0; dim];
    for v in honest {
        for (s, (&x, &m)) in var.iter_mut().zip(v.iter().zip(&mu)) {
            *s += (x - m) * (x - m);
        }
    }
    Ok(mu
        .iter()
        .zip(&var)
        .map(|(&m, &s)| m + tau * (s / n).sqrt())
        .collect())
}

/// Label flipping: class l becomes (K-1) - l.
pub fn labelflip(label: usize, classes: usize) -> Result<usize> {
    if label >= classes {
        return Err(Error::LabelOutOfRange { label, classes });
    }
    Ok(classes - 1 - label)
}

/// Running direction estimate for the mimic heuristic: one power-iteration
/// step per training round on the centered honest matrix.
#[derive(Debug, Clone)]
pub struct MimicState {
    pub direction: Vec<f64>,
    pub steps: u64,
}

impl MimicState {
    /// Starts from the normalized all-ones direction.
    pub fn new(dim: usize) -> Self {
        let norm = (dim as f64).sqrt();
        MimicState {
            direction: vec![1.0 / norm; dim],
            steps: 0,
        }
    }
}

/// Returns a copy of the honest vector with the largest absolute projection
/// of its centered value onto the current direction (ties to the lowest
/// index), then advances the direction by one power-iteration step.
pub fn mimic(honest: &[Vec<f64>], state: &mut MimicState) -> Result<Vec<f64>> {
    let mu = mean(honest)?;
    let dot = |v: &[f64]| -> f64 {
        v.iter()
            .zip(&mu)
            .zip(&state.direction)
            .map(|((&x, &m), &d)| (x - m) * d)
            .sum()
    };
    let mut best = 0usize;
    let mut best_score = f64::NEG_INFINITY;
    for (i, v) in honest.iter().enumerate() {
        let s = dot(v).abs();
        if s > best_score {
            best_score = s;
            best = i;
        }
    }
    // power-iteration step: direction <- normalize(Sigma * direction) where
    // Sigma is the empirical second moment of the centered vectors
    let dim = mu.len();
    let mut next = vec![0.0; dim];
    for v in honest {
        let proj = dot(v);
        for (nx, (&x, &m)) in next.iter_mut().zip(v.iter().zip(&mu)) {
            *nx += proj * (x - m);
        }
    }
    let norm = next.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        next.iter_mut().for_each(|x| *x /= norm);
        state.direction = next;
    }
    state.steps += 1;
    Ok(honest[best].clone())
}

/// Greedy scale search: the grid tau maximizing the Euclidean distance
/// between the honest mean and the aggregate of honest plus f attack copies.
/// Ties break to the earliest grid position.
pub fn optimize_tau<A>(
    kind: AttackKind,
    honest: &[Vec<f64>],
    aggregate: A,
    tau_grid: &[f64],
    f: usize,
) -> Result<f64>
where
    A: Fn(&[Vec<f64>]) -> Vec<f64>,
{
    if tau_grid.is_empty() {
        return Err(Error::Config("tau grid must be non-empty".into()));
    }
    let mu = mean(honest)?;
    let mut best_tau = tau_grid[0];
    let mut best_dist = f64::NEG_INFINITY;
    for &tau in tau_grid {
        let crafted = match kind {
            AttackKind::Foe => foe(honest, tau)?,
            AttackKind::Alie => alie(honest, tau)?,
            _ => return Err(Error::Config(format!("attack {} takes no tau", kind.name()))),
        };
        let mut all = honest.to_vec();
        all.extend(std::iter::repeat_n(crafted, f));
        let agg = aggregate(&all);
        let dist: f64 = agg
            .iter()
            .zip(&mu)
            .map(|(&a, &m)| (a - m) * (a - m))
            .sum::<f64>()
            .sqrt();
        if dist > best_dist {
            best_dist = dist;
            best_tau = tau;
        }
    }
    Ok(best_tau)
}
