//! Clustered instances and the price of clustering: the ratio between the
//! sum of per-cluster optima and the global optimum.

use std::collections::BTreeMap;

use num_traits::Zero;

use crate::construction::Certificate;
use crate::error::{Error, Result};
use crate::packing::{expand, ffd, optimal_bin_count, ClusterId, ItemClass};
use crate::size::{ceil_u64, Size, Q};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cluster {
    pub id: ClusterId,
    pub classes: Vec<ItemClass>,
}

impl Cluster {
    pub fn groups(&self) -> Vec<(Size, u64)> {
        self.classes.iter().map(|c| (c.size.clone(), c.count)).collect()
    }

    pub fn item_count(&self) -> u64 {
        self.classes.iter().map(|c| c.count).sum()
    }
}

/// Clusters in a fixed order; `k` is the declared lower bound on every
/// cluster's optimal cost.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClusteredInstance {
    pub k: u64,
    pub clusters: Vec<Cluster>,
}

impl ClusteredInstance {
    /// Groups classes by their cluster tag, in first-appearance order.
    pub fn from_classes(k: u64, classes: Vec<ItemClass>) -> Result<Self> {
        let mut order: Vec<ClusterId> = Vec::new();
        let mut by_id: BTreeMap<ClusterId, Vec<ItemClass>> = BTreeMap::new();
        for class in classes {
            let id = class
                .cluster
                .clone()
                .ok_or_else(|| Error::InvalidInstance("clustered item without a cluster id".into()))?;
            if !by_id.contains_key(&id) {
                order.push(id.clone());
            }
            by_id.entry(id).or_default().push(class);
        }
        let clusters = order
            .into_iter()
            .map(|id| {
                let classes = by_id.remove(&id).unwrap_or_default();
                Cluster { id, classes }
            })
            .collect();
        Ok(ClusteredInstance { k, clusters })
    }

    /// All classes, each tagged with its cluster.
    pub fn classes(&self) -> Vec<ItemClass> {
        self.clusters
            .iter()
            .flat_map(|c| {
                c.classes.iter().map(move |class| ItemClass {
                    cluster: Some(c.id.clone()),
                    ..class.clone()
                })
            })
            .collect()
    }

    /// Size multiset over all clusters.
    pub fn size_counts(&self) -> BTreeMap<Size, u64> {
        let mut counts = BTreeMap::new();
        for cluster in &self.clusters {
            for class in &cluster.classes {
                *counts.entry(class.size.clone()).or_default() += class.count;
            }
        }
        counts
    }

    pub fn large_item_count(&self) -> u64 {
        self.size_counts()
            .iter()
            .filter(|(s, _)| s.is_large())
            .map(|(_, c)| c)
            .sum()
    }

    pub fn total_size(&self) -> Q {
        self.size_counts()
            .iter()
            .fold(Q::zero(), |acc, (s, c)| acc + s.value() * Q::from_integer((*c).into()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PriceMode {
    Exact,
    /// Sum of FFD bin counts over the total-size lower bound.
    FfdUpper,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GlobalOptMethod {
    ExactSolver,
    CertificateLargeItemBound,
    SizeLowerBound,
}

impl GlobalOptMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            GlobalOptMethod::ExactSolver => "exact-solver",
            GlobalOptMethod::CertificateLargeItemBound => "certificate+large-item-bound",
            GlobalOptMethod::SizeLowerBound => "size-lower-bound",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClusterCost {
    pub id: ClusterId,
    /// Exact optimum; `None` in FFD-upper mode.
    pub opt: Option<u64>,
    pub ffd_bins: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PriceReport {
    pub mode: PriceMode,
    /// Sum of cluster optima (exact mode) or of FFD bin counts (upper mode).
    pub sum_cluster_opt: u64,
    pub global_opt: u64,
    pub global_method: GlobalOptMethod,
    pub ratio: Q,
    pub per_cluster: Vec<ClusterCost>,
    /// Clusters whose exact optimum is below `k`.
    pub below_k: Vec<ClusterId>,
}

impl PriceReport {
    /// The instance satisfies the per-cluster lower bound `k`.
    pub fn is_valid_instance(&self) -> bool {
        self.below_k.is_empty()
    }
}

fn ffd_bins(cluster: &Cluster) -> u64 {
    ffd(&expand(&cluster.classes)).bin_count as u64
}

/// Price of clustering for one instance. In exact mode the global optimum
/// comes from a verified certificate when one is supplied (it must meet the
/// large-item lower bound), otherwise from the exact solver.
pub fn price_of_clustering(
    inst: &ClusteredInstance,
    mode: PriceMode,
    certificate: Option<&Certificate>,
    item_limit: usize,
) -> Result<PriceReport> {
    let mut per_cluster = Vec::with_capacity(inst.clusters.len());
    let mut below_k = Vec::new();
    let mut sum = 0u64;
    for cluster in &inst.clusters {
        let a = ffd_bins(cluster);
        let opt = match mode {
            PriceMode::Exact => {
                let opt = optimal_bin_count(&cluster.groups(), item_limit)?;
                if opt < inst.k {
                    below_k.push(cluster.id.clone());
                }
                sum += opt;
                Some(opt)
            }
            PriceMode::FfdUpper => {
                sum += a;
                None
            }
        };
        per_cluster.push(ClusterCost {
            id: cluster.id.clone(),
            opt,
            ffd_bins: a,
        });
    }

    let (global_opt, global_method) = match mode {
        PriceMode::FfdUpper => (ceil_u64(&inst.total_size()), GlobalOptMethod::SizeLowerBound),
        PriceMode::Exact => match certificate {
            Some(cert) => {
                let problems = cert.check_against(inst);
                if !problems.is_empty() {
                    return Err(Error::InvalidInstance(format!(
                        "certificate rejected: {}",
                        problems.join("; ")
                    )));
                }
                let bins = cert.bin_count();
                if bins != inst.large_item_count() {
                    return Err(Error::InvalidInstance(format!(
                        "certificate uses {bins} bins but only {} items exceed 1/2",
                        inst.large_item_count()
                    )));
                }
                (bins, GlobalOptMethod::CertificateLargeItemBound)
            }
            None => {
                let groups: Vec<(Size, u64)> = inst.size_counts().into_iter().rev().collect();
                (optimal_bin_count(&groups, item_limit)?, GlobalOptMethod::ExactSolver)
            }
        },
    };
    let ratio = if global_opt == 0 {
        Q::zero()
    } else {
        Q::new(sum.into(), global_opt.into())
    };
    Ok(PriceReport {
        mode,
        sum_cluster_opt: sum,
        global_opt,
        global_method,
        ratio,
        per_cluster,
        below_k,
    })
}
