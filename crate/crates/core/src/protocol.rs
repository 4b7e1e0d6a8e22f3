//! The distributed robust-training loop: local gradients and momentum,
//! clamp-and-quantize, server-side aggregation (homomorphic, cleartext
//! oracle, or plain averaging), optional node subsampling, and the shared
//! model update. The server only ever sees encoded integers; it never holds
//! the model.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::attacks::{alie, foe, labelflip, mimic, optimize_tau, AttackKind, MimicState};
use crate::circuit::hts;
use crate::config::{AttackDomain, ExperimentConfig};
use crate::datasim::{dirichlet_split, synth_dataset, Dataset, Shard};
use crate::encoding::{decode_packed, pack, param_search, EncodingParams, ParamSpec};
use crate::error::{Error, Result};
use crate::oracle::{cwts, cwtm};
use crate::slot::{OpCounts, TrackedVector, Tracker};

/// How the server combines the vectors it receives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AggMode {
    /// Trimmed sum evaluated by the slot-circuit engine on encoded inputs.
    Homomorphic,
    /// Trimmed sum evaluated directly on the decoded integers.
    Oracle,
    /// Plain column sum (no robustness); baseline only.
    Average,
}

impl AggMode {
    pub fn name(&self) -> &'static str {
        match self {
            AggMode::Homomorphic => "homomorphic",
            AggMode::Oracle => "oracle",
            AggMode::Average => "average",
        }
    }

    /// Name of the aggregation rule for reporting: identical across the two
    /// trimmed-sum evaluation modes, which must be indistinguishable in
    /// output.
    pub fn rule_name(&self) -> &'static str {
        match self {
            AggMode::Homomorphic | AggMode::Oracle => "trimmed_mean",
            AggMode::Average => "average",
        }
    }
}

/// Exact multinomial logistic regression gradient of the mean negative
/// log-likelihood over the batch, plus l2 * theta. Layout: weights of class
/// c at [c*dims, (c+1)*dims), then the K biases.
pub fn gradient(
    theta: &[f64],
    dataset: &Dataset,
    batch: &[usize],
    classes: usize,
    dims: usize,
    l2: f64,
    flip_labels: bool,
) -> Result<Vec<f64>> {
    if batch.is_empty() {
        return Err(Error::EmptyInput);
    }
    assert_eq!(theta.len(), classes * dims + classes);
    let mut grad = vec![0.0; theta.len()];
    let scale = 1.0 / batch.len() as f64;
    for &idx in batch {
        let x = &dataset.features[idx];
        let label = if flip_labels {
            labelflip(dataset.labels[idx], classes)?
        } else {
            dataset.labels[idx]
        };
        let probs = softmax_probs(theta, x, classes, dims);
        for c in 0..classes {
            let resid = probs[c] - f64::from(u8::from(c == label));
            let w = &mut grad[c * dims..(c + 1) * dims];
            for (g, &xi) in w.iter_mut().zip(x) {
                *g += scale * resid * xi;
            }
            grad[classes * dims + c] += scale * resid;
        }
    }
    for (g, &t) in grad.iter_mut().zip(theta) {
        *g += l2 * t;
    }
    Ok(grad)
}

fn softmax_probs(theta: &[f64], x: &[f64], classes: usize, dims: usize) -> Vec<f64> {
    let mut logits: Vec<f64> = (0..classes)
        .map(|c| {
            let w = &theta[c * dims..(c + 1) * dims];
            w.iter().zip(x).map(|(&wi, &xi)| wi * xi).sum::<f64>() + theta[classes * dims + c]
        })
        .collect();
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for l in logits.iter_mut() {
        *l = (*l - max).exp();
        sum += *l;
    }
    logits.iter_mut().for_each(|l| *l /= sum);
    logits
}

/// Fraction of the dataset classified correctly (argmax logits, ties to the
/// lowest class).
pub fn accuracy(theta: &[f64], dataset: &Dataset, classes: usize, dims: usize) -> f64 {
    let mut correct = 0usize;
    for (x, &label) in dataset.features.iter().zip(&dataset.labels) {
        let probs = softmax_probs(theta, x, classes, dims);
        let mut best = 0usize;
        for c in 1..classes {
            if probs[c] > probs[best] {
                best = c;
            }
        }
        if best == label {
            correct += 1;
        }
    }
    correct as f64 / dataset.len() as f64
}

/// Quantization factor Q = (2^(delta-1) - 1) / C.
pub fn quant_scale(delta: u32, clamp: f64) -> f64 {
    ((1u64 << (delta - 1)) - 1) as f64 / clamp
}

/// Largest quantized magnitude, 2^(delta-1) - 1.
pub fn quant_max(delta: u32) -> i64 {
    (1i64 << (delta - 1)) - 1
}

/// Wire-format headroom above the honest quantization range. Byzantine
/// senders are bound only by what the encoding can represent, not by the
/// honest clamp, so the encoding is sized for this wider range and crafted
/// vectors are clamped to it.
pub const ATTACK_HEADROOM: i64 = 4;

/// Largest integer magnitude the wire format accepts.
pub fn wire_max(delta: u32) -> i64 {
    ATTACK_HEADROOM * quant_max(delta)
}

/// Clamp to [-C, C], scale by Q, and round half away from zero.
pub fn qua(v: &[f64], delta: u32, clamp: f64) -> Vec<i64> {
    let q = quant_scale(delta, clamp);
    v.iter()
        .map(|&x| (x.clamp(-clamp, clamp) * q).round() as i64)
        .collect()
}

/// Uniform sample of 2f+1 of n node indices without replacement, sorted.
pub fn subsample<R: Rng>(n: usize, f: usize, rng: &mut R) -> Result<Vec<usize>> {
    let want = 2 * f + 1;
    if want > n {
        return Err(Error::SubsampleTooLarge { want, n });
    }
    let mut idx = rand::seq::index::sample(rng, n, want).into_vec();
    idx.sort_unstable();
    Ok(idx)
}

/// Combines the received quantized vectors. Returns the integer aggregate
/// and the effective window (the divisor for the subsequent mean).
/// The homomorphic and oracle modes agree bit-exactly.
pub fn server_aggregate(
    sent: &[Vec<i64>],
    f: usize,
    mode: AggMode,
    enc: Option<&EncodingParams>,
    ops: &mut OpCounts,
) -> Result<(Vec<i64>, usize)> {
    let s = sent.len();
    if s == 0 {
        return Err(Error::EmptyInput);
    }
    match mode {
        AggMode::Average => {
            let dim = sent[0].len();
            let mut out = vec![0i64; dim];
            for v in sent {
                for (o, &x) in out.iter_mut().zip(v) {
                    *o += x;
                }
            }
            Ok((out, s))
        }
        AggMode::Oracle => {
            if 2 * f >= s {
                return Err(Error::InvalidTrim { n: s, f });
            }
            Ok((cwts(sent, f)?, s - 2 * f))
        }
        AggMode::Homomorphic => {
            let enc = enc.expect("homomorphic mode requires encoding parameters");
            if 2 * f >= s {
                return Err(Error::InvalidTrim { n: s, f });
            }
            let window = s - 2 * f;
            let batches: Vec<_> = sent.iter().map(|v| pack(v, enc)).collect::<Result<_>>()?;
            let dim = sent[0].len();
            let chunks = batches[0].vectors.len();
            let mut out_vectors = Vec::with_capacity(chunks);
            for chunk in 0..chunks {
                let inputs: Vec<TrackedVector> = batches
                    .iter()
                    .map(|b: &crate::encoding::PackedBatch| {
                        TrackedVector::fresh(b.vectors[chunk].clone())
                    })
                    .collect();
                let mut t = Tracker::new();
                let r = hts(&inputs, f, enc, &mut t)?;
                *ops += t.counts;
                out_vectors.push(r.value);
            }
            Ok((decode_packed(&out_vectors, dim, enc, window as u64), window))
        }
    }
}

/// Applies the trimmed-mean update: theta -= gamma * (aggregate / window) / Q.
pub fn local_update(theta: &mut [f64], aggregate: &[i64], window: usize, gamma: f64, q: f64) {
    let scale = gamma / (window as f64 * q);
    for (t, &a) in theta.iter_mut().zip(aggregate) {
        *t -= scale * a as f64;
    }
}

pub const METRICS_HEADER: &str = "step,train_acc,test_acc,attack,aggregator,f,n,seed";

#[derive(Debug, Clone, PartialEq)]
pub struct MetricRow {
    pub step: u64,
    pub train_acc: f64,
    pub test_acc: f64,
    pub attack: String,
    pub aggregator: String,
    pub f: usize,
    pub n: usize,
    pub seed: u64,
}

impl MetricRow {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{:.6},{:.6},{},{},{},{},{}",
            self.step,
            self.train_acc,
            self.test_acc,
            self.attack,
            self.aggregator,
            self.f,
            self.n,
            self.seed
        )
    }
}

/// Per-step record kept when tracing is requested: the chosen node subset,
/// the quantized vectors they sent, and the resulting aggregate.
#[derive(Debug, Clone)]
pub struct StepTrace {
    pub step: u64,
    pub subset: Vec<usize>,
    pub sent: Vec<Vec<i64>>,
    pub aggregate: Vec<i64>,
    pub window: usize,
}

#[derive(Debug, Clone)]
pub struct TrainResult {
    pub rows: Vec<MetricRow>,
    pub final_train_acc: f64,
    pub final_test_acc: f64,
    pub theta: Vec<f64>,
    pub total_ops: OpCounts,
    pub trace: Option<Vec<StepTrace>>,
}

/// Builds encoding parameters matching a config's quantization range and
/// aggregation width.
pub fn encoding_for(cfg: &ExperimentConfig) -> Result<EncodingParams> {
    let spec = ParamSpec {
        range: 2 * wire_max(cfg.delta) as u64 + 1,
        offset: wire_max(cfg.delta),
        base: cfg.encoding.base,
        n: cfg.n,
        f: cfg.f,
        slot_degree: cfg.encoding.slot_degree,
        min_slots: cfg.encoding.min_slots,
        max_p: cfg.encoding.max_p,
        max_m: cfg.encoding.max_m,
    };
    param_search(&spec)
}

struct NodeState {
    shard: Shard,
    momentum: Vec<f64>,
    batch_rng: ChaCha12Rng,
    /// Byzantine label-flip nodes train honestly on flipped labels.
    flip_labels: bool,
}

impl NodeState {
    fn sample_batch(&mut self, batch: usize) -> Vec<usize> {
        // uniform with replacement from the shard
        (0..batch)
            .map(|_| self.shard.indices[self.batch_rng.gen_range(0..self.shard.indices.len())])
            .collect()
    }
}

/// Runs the full training loop on the given train/test data. Deterministic
/// per config seed. Nodes n-f..n are the Byzantine ones; all honest nodes
/// share one model (they apply identical updates).
pub fn run_training(
    cfg: &ExperimentConfig,
    train: &Dataset,
    test: &Dataset,
    keep_trace: bool,
) -> Result<TrainResult> {
    let (n, f) = (cfg.n, cfg.f);
    let classes = train.classes;
    let dims = train.dims();
    let dim = classes * dims + classes;
    let q = quant_scale(cfg.delta, cfg.clamp);

    let enc = match cfg.agg_mode {
        AggMode::Homomorphic => Some(encoding_for(cfg)?),
        _ => None,
    };

    // RNG fork order from the master seed: data split, then one batch
    // stream per node (index order), then the subsampling stream.
    let mut master = ChaCha12Rng::seed_from_u64(cfg.seed);
    let split_seed: u64 = master.gen();
    let node_seeds: Vec<u64> = (0..n).map(|_| master.gen()).collect();
    let mut subsample_rng = ChaCha12Rng::seed_from_u64(master.gen());

    let shards = dirichlet_split(train, n, cfg.alpha, split_seed)?;
    let byz_start = n - f;
    let mut nodes: Vec<NodeState> = shards
        .into_iter()
        .enumerate()
        .map(|(i, shard)| NodeState {
            shard,
            momentum: vec![0.0; dim],
            batch_rng: ChaCha12Rng::seed_from_u64(node_seeds[i]),
            flip_labels: i >= byz_start && cfg.attack.kind == AttackKind::LabelFlip,
        })
        .collect();

    // nodes that run the real local training procedure
    let trains_honestly = |i: usize| {
        i < byz_start || matches!(cfg.attack.kind, AttackKind::None | AttackKind::LabelFlip)
    };

    let mut theta = vec![0.0; dim];
    let mut mimic_state = MimicState::new(dim);
    let mut rows = Vec::new();
    let mut trace = keep_trace.then(Vec::new);
    let mut total_ops = OpCounts::default();

    let record = |theta: &[f64], step: u64, rows: &mut Vec<MetricRow>| {
        rows.push(MetricRow {
            step,
            train_acc: accuracy(theta, train, classes, dims),
            test_acc: accuracy(theta, test, classes, dims),
            attack: cfg.attack.kind.name().to_string(),
            aggregator: cfg.agg_mode.rule_name().to_string(),
            f,
            n,
            seed: cfg.seed,
        });
    };
    record(&theta, 0, &mut rows);

    for step in 1..=cfg.steps {
        // local phase: gradients, momentum, quantization
        let mut quantized: Vec<Option<Vec<i64>>> = vec![None; n];
        for i in 0..n {
            if !trains_honestly(i) {
                continue;
            }
            let g = if nodes[i].shard.indices.is_empty() {
                // a node with no data contributes a decaying momentum
                vec![0.0; dim]
            } else {
                let batch = nodes[i].sample_batch(cfg.batch);
                gradient(&theta, train, &batch, classes, dims, cfg.l2, nodes[i].flip_labels)?
            };
            let m = &mut nodes[i].momentum;
            for (mj, gj) in m.iter_mut().zip(&g) {
                *mj = cfg.beta * *mj + (1.0 - cfg.beta) * gj;
            }
            quantized[i] = Some(qua(m, cfg.delta, cfg.clamp));
        }

        // crafting phase: Byzantine vectors from the honest ones
        if f > 0 && matches!(cfg.attack.kind, AttackKind::Foe | AttackKind::Alie | AttackKind::Mimic)
        {
            let honest_real: Vec<Vec<f64>> = match cfg.attack_domain {
                AttackDomain::Quantized => (0..byz_start)
                    .map(|i| {
                        quantized[i]
                            .as_ref()
                            .unwrap()
                            .iter()
                            .map(|&x| x as f64)
                            .collect()
                    })
                    .collect(),
                AttackDomain::Raw => (0..byz_start).map(|i| nodes[i].momentum.clone()).collect(),
            };
            let crafted_real = match cfg.attack.kind {
                AttackKind::Mimic => mimic(&honest_real, &mut mimic_state)?,
                kind => {
                    let tau = match cfg.attack.fixed_tau {
                        Some(t) => t,
                        None => optimize_tau(
                            kind,
                            &honest_real,
                            |rows| cwtm(rows, f).expect("valid trim"),
                            &cfg.attack.tau_grid,
                            f,
                        )?,
                    };
                    match kind {
                        AttackKind::Foe => foe(&honest_real, tau)?,
                        AttackKind::Alie => alie(&honest_real, tau)?,
                        _ => unreachable!(),
                    }
                }
            };
            // back to the on-the-wire integer domain, clamped to the
            // encodable range (Byzantine nodes follow the protocol format
            // but are not bound by the honest clamp)
            let wmax = wire_max(cfg.delta);
            let crafted_int: Vec<i64> = match cfg.attack_domain {
                AttackDomain::Quantized => crafted_real
                    .iter()
                    .map(|&x| (x.round() as i64).clamp(-wmax, wmax))
                    .collect(),
                AttackDomain::Raw => crafted_real
                    .iter()
                    .map(|&x| {
                        ((x * q).round() as i64).clamp(-wmax, wmax)
                    })
                    .collect(),
            };
            for slot in quantized.iter_mut().skip(byz_start) {
                *slot = Some(crafted_int.clone());
            }
        }

        // server phase
        let subset: Vec<usize> = if cfg.subsample {
            subsample(n, f, &mut subsample_rng)?
        } else {
            (0..n).collect()
        };
        let sent: Vec<Vec<i64>> = subset
            .iter()
            .map(|&i| quantized[i].clone().expect("every node sent a vector"))
            .collect();
        let (aggregate, window) =
            server_aggregate(&sent, f, cfg.agg_mode, enc.as_ref(), &mut total_ops)?;

        if let Some(tr) = trace.as_mut() {
            tr.push(StepTrace {
                step,
                subset,
                sent,
                aggregate: aggregate.clone(),
                window,
            });
        }

        // every honest node applies the identical update
        local_update(&mut theta, &aggregate, window, cfg.gamma, q);

        if step % cfg.eval_every == 0 || step == cfg.steps {
            record(&theta, step, &mut rows);
        }
    }

    let last = rows.last().expect("at least the step-0 row");
    Ok(TrainResult {
        final_train_acc: last.train_acc,
        final_test_acc: last.test_acc,
        rows,
        theta,
        total_ops,
        trace,
    })
}

/// Convenience wrapper generating the synthetic train/test datasets named by
/// the config and running the loop. One pool is drawn so both splits share
/// the class distributions; the tail holds the test samples.
pub fn run_training_synth(cfg: &ExperimentConfig, keep_trace: bool) -> Result<TrainResult> {
    let ds = &cfg.dataset;
    let pool = synth_dataset(
        cfg.seed,
        ds.classes,
        ds.dims,
        ds.size + ds.test_size,
        ds.separation,
        ds.anisotropy,
    );
    let take = |range: std::ops::Range<usize>| Dataset {
        features: pool.features[range.clone()].to_vec(),
        labels: pool.labels[range].to_vec(),
        classes: pool.classes,
    };
    let train = take(0..ds.size);
    let test = take(ds.size..ds.size + ds.test_size);
    run_training(cfg, &train, &test, keep_trace)
}
