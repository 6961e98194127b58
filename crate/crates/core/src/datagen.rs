//! Synthetic transaction networks with planted fraud rings.
//!
//! Attribute popularity is Zipf-skewed. A random subset of billing accounts
//! and IP addresses is marked risky; transactions touching one are fraud
//! with the ring probability, all others with the base rate. Base features
//! are class-conditional Gaussians whose fraud shift is damped for ring
//! members, so the graph carries evidence the features alone do not.

use std::collections::BTreeMap;
use std::path::Path;

use ndarray::Array2;
use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Zipf};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hin::io::{write_edge_file, write_labels, write_matrix, write_node_file, DatasetPaths};
use crate::hin::{Cardinality, Dataset, Hin, HinSchema, Labels, LinkTypeDef, NodeRole, NodeTypeDef};

pub const TRANSACTION: &str = "transaction";
pub const USER: &str = "user";
pub const BILLING: &str = "billing";
pub const IP: &str = "ip";
pub const ITEM: &str = "item";
pub const TITLE: &str = "title";
pub const CURRENCY: &str = "currency";
pub const SOURCE: &str = "source";
pub const COUNTRY: &str = "country";
pub const ACCOUNT_TYPE: &str = "account_type";

/// Node types in schema order.
pub const NODE_TYPES: [&str; 10] = [TRANSACTION, USER, BILLING, IP, ITEM, TITLE, CURRENCY, SOURCE, COUNTRY, ACCOUNT_TYPE];

/// `(name, source, target, cardinality)` of every link type, in schema order.
pub const LINK_TYPES: [(&str, &str, &str, Cardinality); 12] = [
    ("byUser", TRANSACTION, USER, Cardinality::ManyToOne),
    ("byBilling", TRANSACTION, BILLING, Cardinality::ManyToOne),
    ("tranIP", TRANSACTION, IP, Cardinality::ManyToOne),
    ("containsItem", TRANSACTION, ITEM, Cardinality::ManyToMany),
    ("fromSource", TRANSACTION, SOURCE, Cardinality::ManyToOne),
    ("inCurrency", TRANSACTION, CURRENCY, Cardinality::ManyToOne),
    ("billingIP", BILLING, IP, Cardinality::ManyToOne),
    ("isTitle", ITEM, TITLE, Cardinality::ManyToOne),
    ("userCountry", USER, COUNTRY, Cardinality::ManyToOne),
    ("billingCountry", BILLING, COUNTRY, Cardinality::ManyToOne),
    ("binCountry", BILLING, COUNTRY, Cardinality::ManyToOne),
    ("isAccount", BILLING, ACCOUNT_TYPE, Cardinality::ManyToOne),
];

/// The transaction network schema the generator emits.
pub fn desk_schema() -> HinSchema {
    let node_types = NODE_TYPES
        .iter()
        .map(|&name| NodeTypeDef {
            name: name.into(),
            role: if name == TRANSACTION { NodeRole::Target } else { NodeRole::Attribute },
        })
        .collect();
    let link_types = LINK_TYPES
        .iter()
        .map(|&(name, s, t, cardinality)| LinkTypeDef { name: name.into(), source: s.into(), target: t.into(), cardinality })
        .collect();
    HinSchema::new(node_types, link_types).expect("built-in schema is valid")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenConfig {
    pub transactions: usize,
    pub users: usize,
    pub billings: usize,
    pub ips: usize,
    pub items: usize,
    pub titles: usize,
    pub currencies: usize,
    pub sources: usize,
    pub countries: usize,
    pub account_types: usize,
    /// Zipf exponent of attribute popularity.
    pub zipf_exponent: f64,
    /// Per-node-type exponent overrides, keyed by type name.
    pub zipf_overrides: BTreeMap<String, f64>,
    pub max_items_per_transaction: usize,
    pub fraud_base_rate: f64,
    pub risky_billing_fraction: f64,
    pub risky_ip_fraction: f64,
    pub ring_probability: f64,
    pub feature_dim: usize,
    /// Mean shift of fraud on the informative half of the base features.
    pub feature_signal: f64,
    /// Multiplier on the shift for fraud that touches a risky entity.
    pub ring_signal_damping: f64,
    pub time_start: i64,
    pub time_span: i64,
    pub seed: u64,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            transactions: 20_000,
            users: 8_000,
            billings: 500,
            ips: 800,
            items: 300,
            titles: 60,
            currencies: 8,
            sources: 10,
            countries: 30,
            account_types: 4,
            zipf_exponent: 0.8,
            zipf_overrides: BTreeMap::new(),
            max_items_per_transaction: 3,
            fraud_base_rate: 0.05,
            risky_billing_fraction: 0.05,
            risky_ip_fraction: 0.05,
            ring_probability: 0.9,
            feature_dim: 20,
            feature_signal: 1.3,
            ring_signal_damping: 0.25,
            time_start: 1_500_000_000,
            time_span: 8 * 7 * 86_400,
            seed: 42,
        }
    }
}

impl GenConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::ConfigInvalid(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Node count per type, in [`NODE_TYPES`] order.
    pub fn counts(&self) -> [usize; 10] {
        [
            self.transactions,
            self.users,
            self.billings,
            self.ips,
            self.items,
            self.titles,
            self.currencies,
            self.sources,
            self.countries,
            self.account_types,
        ]
    }

    pub fn exponent(&self, node_type: &str) -> f64 {
        self.zipf_overrides.get(node_type).copied().unwrap_or(self.zipf_exponent)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::ConfigInvalid(msg));
        let counts = self.counts();
        for (name, &c) in NODE_TYPES.iter().zip(&counts) {
            if c == 0 {
                return bad(format!("{name} count must be at least 1"));
            }
            if *name != TRANSACTION && c >= self.transactions {
                return bad(format!("{name} count {c} must be below the transaction count"));
            }
            let s = self.exponent(name);
            if !(s.is_finite() && s >= 0.0) {
                return bad(format!("zipf exponent {s} for {name} must be finite and non-negative"));
            }
        }
        for key in self.zipf_overrides.keys() {
            if !NODE_TYPES.contains(&key.as_str()) {
                return bad(format!("zipf override for unknown node type {key:?}"));
            }
        }
        for (name, p) in [
            ("fraud_base_rate", self.fraud_base_rate),
            ("risky_billing_fraction", self.risky_billing_fraction),
            ("risky_ip_fraction", self.risky_ip_fraction),
            ("ring_probability", self.ring_probability),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} {p} outside [0, 1]"));
            }
        }
        if self.max_items_per_transaction == 0 || self.max_items_per_transaction > self.items {
            return bad(format!("max_items_per_transaction must be in 1..={}", self.items));
        }
        if self.feature_dim == 0 {
            return bad("feature_dim must be at least 1".into());
        }
        if !self.feature_signal.is_finite() || !self.ring_signal_damping.is_finite() {
            return bad("feature signal settings must be finite".into());
        }
        if self.time_span < 1 {
            return bad("time_span must be at least 1".into());
        }
        Ok(())
    }
}

/// Popularity-skewed sampler over `0..n`: Zipf ranks mapped through a
/// random permutation so popularity is unrelated to the id.
struct Popularity {
    zipf: Zipf<f64>,
    by_rank: Vec<usize>,
    /// Probability of each id.
    pmf: Vec<f64>,
}

impl Popularity {
    fn new(n: usize, s: f64, rng: &mut ChaCha8Rng) -> Self {
        let mut by_rank: Vec<usize> = (0..n).collect();
        by_rank.shuffle(rng);
        let weights: Vec<f64> = (1..=n).map(|k| (k as f64).powf(-s)).collect();
        let total: f64 = weights.iter().sum();
        let mut pmf = vec![0.0; n];
        for (rank, &id) in by_rank.iter().enumerate() {
            pmf[id] = weights[rank] / total;
        }
        Popularity { zipf: Zipf::new(n as f64, s).expect("validated exponent"), by_rank, pmf }
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> usize {
        let rank = self.zipf.sample(rng) as usize;
        self.by_rank[rank.clamp(1, self.by_rank.len()) - 1]
    }
}

/// A generated dataset together with the planted structure behind it.
#[derive(Debug, Clone)]
pub struct Generated {
    pub config: GenConfig,
    pub schema: HinSchema,
    pub node_ids: Vec<Vec<String>>,
    pub edges: Vec<Vec<(usize, usize)>>,
    pub labels: Labels,
    pub features: Array2<f64>,
    pub risky_billing: Vec<usize>,
    pub risky_ip: Vec<usize>,
    /// Whether each transaction touches a risky billing account or IP.
    pub touches_risky: Vec<bool>,
    /// Draw probability of each billing account and IP.
    pub billing_pmf: Vec<f64>,
    pub ip_pmf: Vec<f64>,
}

impl Generated {
    pub fn hin(&self) -> Result<Hin> {
        Hin::from_parts(self.schema.clone(), self.node_ids.clone(), self.edges.clone())
    }

    /// The generated graph, labels and base features as a loaded dataset.
    pub fn dataset(&self) -> Result<Dataset<f64>> {
        Ok(Dataset { hin: self.hin()?, labels: self.labels.clone(), features: self.features.clone() })
    }

    /// Probability that a transaction touches a risky entity.
    pub fn risky_exposure(&self) -> f64 {
        let qb: f64 = self.risky_billing.iter().map(|&b| self.billing_pmf[b]).sum();
        let qi: f64 = self.risky_ip.iter().map(|&i| self.ip_pmf[i]).sum();
        1.0 - (1.0 - qb) * (1.0 - qi)
    }

    /// Fraud rate implied by the planted risky sets.
    pub fn expected_fraud_rate(&self) -> f64 {
        let q = self.risky_exposure();
        self.config.fraud_base_rate * (1.0 - q) + self.config.ring_probability * q
    }

    /// Writes the dataset files under `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let paths = DatasetPaths::for_schema(dir, &self.schema);
        std::fs::write(&paths.schema, self.schema.to_toml_string()).map_err(|e| Error::io(&paths.schema, e))?;
        for (t, nt) in self.schema.node_types().iter().enumerate() {
            write_node_file(&paths.nodes[&nt.name], &self.node_ids[t])?;
        }
        for (k, lt) in self.schema.link_types().iter().enumerate() {
            let src = self.schema.node_type(&lt.source)?.0;
            let dst = self.schema.node_type(&lt.target)?.0;
            let pairs: Vec<(&str, &str)> = self.edges[k]
                .iter()
                .map(|&(a, b)| (self.node_ids[src][a].as_str(), self.node_ids[dst][b].as_str()))
                .collect();
            write_edge_file(&paths.edges[&lt.name], &pairs)?;
        }
        write_labels(&paths.labels, &self.node_ids[0], &self.labels)?;
        write_matrix(&paths.features, "transaction_id", &self.node_ids[0], &[("x", &self.features)])
    }
}

fn id_prefix(node_type: &str) -> &str {
    match node_type {
        TRANSACTION => "t",
        USER => "u",
        BILLING => "b",
        IP => "ip",
        ITEM => "i",
        TITLE => "g",
        CURRENCY => "cur",
        SOURCE => "src",
        COUNTRY => "c",
        _ => "acct",
    }
}

fn pick_risky(n: usize, fraction: f64, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let k = ((n as f64) * fraction).round() as usize;
    let mut v = sample(rng, n, k.min(n)).into_vec();
    v.sort_unstable();
    v
}

pub fn generate(config: &GenConfig) -> Result<Generated> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let counts = config.counts();
    let schema = desk_schema();
    let node_ids: Vec<Vec<String>> = NODE_TYPES
        .iter()
        .zip(&counts)
        .map(|(name, &n)| (0..n).map(|i| format!("{}{i}", id_prefix(name))).collect())
        .collect();
    let pop: BTreeMap<&str, Popularity> = NODE_TYPES[1..]
        .iter()
        .zip(&counts[1..])
        .map(|(&name, &n)| (name, Popularity::new(n, config.exponent(name), &mut rng)))
        .collect();

    let n = config.transactions;
    let mut edges: Vec<Vec<(usize, usize)>> = vec![Vec::new(); LINK_TYPES.len()];
    for (k, &(_, src, dst, _)) in LINK_TYPES.iter().enumerate() {
        if src == TRANSACTION || dst == TRANSACTION {
            continue;
        }
        let n_src = counts[NODE_TYPES.iter().position(|&t| t == src).expect("known type")];
        edges[k] = (0..n_src).map(|i| (i, pop[dst].draw(&mut rng))).collect();
    }

    let risky_billing = pick_risky(config.billings, config.risky_billing_fraction, &mut rng);
    let risky_ip = pick_risky(config.ips, config.risky_ip_fraction, &mut rng);
    let mut is_risky_billing = vec![false; config.billings];
    risky_billing.iter().for_each(|&b| is_risky_billing[b] = true);
    let mut is_risky_ip = vec![false; config.ips];
    risky_ip.iter().for_each(|&i| is_risky_ip[i] = true);

    let noise = Normal::new(0.0, 1.0).expect("unit normal");
    let informative = config.feature_dim.div_ceil(2);
    let mut truth = Vec::with_capacity(n);
    let mut timestamps = Vec::with_capacity(n);
    let mut touches_risky = Vec::with_capacity(n);
    let mut features = Array2::zeros((n, config.feature_dim));
    for t in 0..n {
        let mut billing = 0;
        let mut ip = 0;
        for (k, &(_, src, dst, _)) in LINK_TYPES.iter().enumerate() {
            if src != TRANSACTION {
                continue;
            }
            if dst == ITEM {
                let m = rng.random_range(1..=config.max_items_per_transaction);
                let mut items: Vec<usize> = Vec::with_capacity(m);
                while items.len() < m {
                    let it = pop[ITEM].draw(&mut rng);
                    if !items.contains(&it) {
                        items.push(it);
                    }
                }
                items.sort_unstable();
                edges[k].extend(items.into_iter().map(|it| (t, it)));
                continue;
            }
            let v = pop[dst].draw(&mut rng);
            match dst {
                BILLING => billing = v,
                IP => ip = v,
                _ => {}
            }
            edges[k].push((t, v));
        }
        let risky = is_risky_billing[billing] || is_risky_ip[ip];
        let p = if risky { config.ring_probability } else { config.fraud_base_rate };
        let fraud = rng.random::<f64>() < p;
        let shift = match (fraud, risky) {
            (false, _) => 0.0,
            (true, false) => config.feature_signal,
            (true, true) => config.feature_signal * config.ring_signal_damping,
        };
        for j in 0..config.feature_dim {
            let mean = if j < informative { shift } else { 0.0 };
            features[[t, j]] = mean + noise.sample(&mut rng);
        }
        truth.push(u8::from(fraud));
        touches_risky.push(risky);
        timestamps.push(config.time_start + rng.random_range(0..config.time_span));
    }

    Ok(Generated {
        config: config.clone(),
        schema,
        node_ids,
        edges,
        labels: Labels { truth, timestamps },
        features,
        risky_billing,
        risky_ip,
        touches_risky,
        billing_pmf: pop[BILLING].pmf.clone(),
        ip_pmf: pop[IP].pmf.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> GenConfig {
        GenConfig {
            transactions: 2000,
            users: 800,
            billings: 100,
            ips: 120,
            items: 50,
            titles: 10,
            ..Default::default()
        }
    }

    #[test]
    fn invalid_configs_are_rejected() {
        for bad in [
            GenConfig { users: 0, ..small() },
            GenConfig { billings: 5000, ..small() },
            GenConfig { ring_probability: 1.5, ..small() },
            GenConfig { max_items_per_transaction: 0, ..small() },
            GenConfig { feature_dim: 0, ..small() },
            GenConfig { zipf_exponent: -1.0, ..small() },
        ] {
            assert!(matches!(generate(&bad), Err(Error::ConfigInvalid(_))), "{bad:?}");
        }
    }

    #[test]
    fn output_respects_schema_and_cardinality() {
        let g = generate(&small()).unwrap();
        let hin = g.hin().unwrap();
        assert_eq!(hin.node_counts(), small().counts().to_vec());
        let item = hin.schema().link("containsItem").unwrap();
        assert!(hin.degree_vector(item).iter().all(|&d| (1..=3).contains(&d)));
        assert_eq!(g.features.dim(), (2000, 20));
        let lo = g.config.time_start;
        assert!(g.labels.timestamps.iter().all(|&t| t >= lo && t < lo + g.config.time_span));
    }

    #[test]
    fn fraud_follows_risky_exposure() {
        let g = generate(&small()).unwrap();
        let rate = |touch: bool| {
            let idx: Vec<usize> = (0..g.labels.truth.len()).filter(|&i| g.touches_risky[i] == touch).collect();
            idx.iter().filter(|&&i| g.labels.truth[i] == 1).count() as f64 / idx.len() as f64
        };
        assert!(rate(true) > 0.7);
        assert!(rate(false) < 0.1);
    }

    #[test]
    fn config_toml_round_trip() {
        let mut c = small();
        c.zipf_overrides.insert("ip".into(), 1.1);
        let text = toml::to_string(&c).unwrap();
        assert_eq!(GenConfig::from_toml_str(&text).unwrap(), c);
        assert!(GenConfig::from_toml_str("bogus = 1").is_err());
        assert_eq!(c.exponent("ip"), 1.1);
        assert_eq!(c.exponent("user"), 0.8);
    }
}
