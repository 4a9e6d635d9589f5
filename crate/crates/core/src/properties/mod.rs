//! The 15 dataset properties used as regression covariates.
//!
//! Nine structural statistics need only the graph; the six attribute
//! statistics additionally need labels and/or features. [`profile`] computes
//! everything available and flags the rest instead of aborting.
//!
//! Multiplicity convention: structural statistics clamp edge multiplicities
//! to one, while degree-based statistics (average degree, Gini-Degree,
//! homophily) count them, matching the generative model where degrees are
//! Poisson sums. [`ProfileOptions::count_multiplicities`] flips the split.

mod attribute;
mod structural;

pub use attribute::{
    attribute_assortativity, edge_homogeneity, feature_similarities, homophily_measure,
    FeatureSimilarities,
};
pub use structural::{
    average_degree, avg_clustering_coefficient, degeneracy, degree_assortativity, edge_density,
    gini_degree, pseudo_diameter, rslcc, transitivity, triangle_counts,
};

use crate::graph::{FeatureMatrix, Graph, LabelVector};
use serde::Serialize;
use std::io::Write;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PropertyError {
    #[error("graph has {n} nodes, need at least {need}")]
    TooFewNodes { n: usize, need: usize },
    #[error("statistic undefined: {0}")]
    Undefined(String),
    #[error("graph has no edges")]
    NoEdges,
    #[error("zero-norm feature row at node {node}")]
    ZeroNormFeature { node: usize },
    #[error("need at least two classes, got {0}")]
    SingleClass(u32),
    #[error("missing input: {0}")]
    MissingInput(&'static str),
    #[error("dimension mismatch: {0}")]
    Mismatch(String),
}

/// Knobs for [`profile`] and the individual statistics that honor them.
#[derive(Debug, Clone, Copy)]
pub struct ProfileOptions {
    /// Count edge multiplicities in degree-based statistics (default true).
    pub count_multiplicities: bool,
    /// Compute Gini-Degree on augmented (self-loop) degrees (default false).
    pub augmented_gini: bool,
}

impl Default for ProfileOptions {
    fn default() -> Self {
        ProfileOptions {
            count_multiplicities: true,
            augmented_gini: false,
        }
    }
}

/// Names, in covariate-column order.
pub const PROPERTY_NAMES: [&str; 15] = [
    "edge_density",
    "average_degree",
    "degree_assortativity",
    "pseudo_diameter",
    "rslcc",
    "acc",
    "transitivity",
    "degeneracy",
    "gini_degree",
    "edge_homogeneity",
    "in_feature_similarity",
    "out_feature_similarity",
    "feature_angular_snr",
    "homophily_measure",
    "attribute_assortativity",
];

/// One named real value per property; `None` marks a statistic skipped for a
/// missing input or flagged undefined (reason recorded in `skipped`).
#[derive(Debug, Clone, Default, Serialize)]
pub struct PropertyVector {
    pub edge_density: Option<f64>,
    pub average_degree: Option<f64>,
    pub degree_assortativity: Option<f64>,
    pub pseudo_diameter: Option<u64>,
    pub rslcc: Option<f64>,
    pub acc: Option<f64>,
    pub transitivity: Option<f64>,
    pub degeneracy: Option<u64>,
    pub gini_degree: Option<f64>,
    pub edge_homogeneity: Option<f64>,
    pub in_feature_similarity: Option<f64>,
    pub out_feature_similarity: Option<f64>,
    pub feature_angular_snr: Option<f64>,
    pub homophily_measure: Option<f64>,
    pub attribute_assortativity: Option<f64>,
    /// `(property, reason)` pairs for every `None` above.
    pub skipped: Vec<(String, String)>,
}

impl PropertyVector {
    pub fn defined_count(&self) -> usize {
        15 - self.skipped.len()
    }

    pub fn has_flags(&self) -> bool {
        !self.skipped.is_empty()
    }

    /// Values in `PROPERTY_NAMES` order, `None` for flagged entries.
    pub fn values(&self) -> [Option<f64>; 15] {
        [
            self.edge_density,
            self.average_degree,
            self.degree_assortativity,
            self.pseudo_diameter.map(|v| v as f64),
            self.rslcc,
            self.acc,
            self.transitivity,
            self.degeneracy.map(|v| v as f64),
            self.gini_degree,
            self.edge_homogeneity,
            self.in_feature_similarity,
            self.out_feature_similarity,
            self.feature_angular_snr,
            self.homophily_measure,
            self.attribute_assortativity,
        ]
    }

    /// Single-row CSV with named columns; flagged entries are empty cells.
    pub fn write_csv(&self, dataset: &str, mut w: impl Write) -> std::io::Result<()> {
        write!(w, "dataset")?;
        for name in PROPERTY_NAMES {
            write!(w, ",{name}")?;
        }
        writeln!(w)?;
        write!(w, "{dataset}")?;
        for v in self.values() {
            match v {
                Some(x) => write!(w, ",{x}")?,
                None => write!(w, ",")?,
            }
        }
        writeln!(w)?;
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("property vector serializes")
    }
}

/// Compute every property the inputs allow; per-property errors become flags.
pub fn profile(
    g: &Graph,
    x: Option<&FeatureMatrix>,
    y: Option<&LabelVector>,
    opts: ProfileOptions,
) -> PropertyVector {
    let mut out = PropertyVector::default();
    let mut skipped: Vec<(String, String)> = Vec::new();

    macro_rules! set {
        ($field:ident, $name:expr, $expr:expr) => {
            match $expr {
                Ok(v) => out.$field = Some(v),
                Err(e) => skipped.push(($name.to_string(), e.to_string())),
            }
        };
    }

    set!(edge_density, "edge_density", edge_density(g));
    set!(average_degree, "average_degree", average_degree(g, opts));
    set!(
        degree_assortativity,
        "degree_assortativity",
        degree_assortativity(g)
    );
    set!(pseudo_diameter, "pseudo_diameter", pseudo_diameter(g));
    set!(rslcc, "rslcc", rslcc(g));

    // acc and transitivity share one triangle pass.
    match triangle_counts(&g.as_undirected().clamped()) {
        Ok(tri) => {
            set!(
                acc,
                "acc",
                structural::acc_from_counts(g, &tri)
            );
            set!(
                transitivity,
                "transitivity",
                Ok::<f64, PropertyError>(structural::transitivity_from_counts(&tri))
            );
        }
        Err(e) => {
            skipped.push(("acc".into(), e.to_string()));
            skipped.push(("transitivity".into(), e.to_string()));
        }
    }

    set!(degeneracy, "degeneracy", degeneracy(g));
    set!(gini_degree, "gini_degree", gini_degree(g, opts));

    match y {
        Some(y) => {
            set!(
                edge_homogeneity,
                "edge_homogeneity",
                edge_homogeneity(g, y)
            );
            set!(
                homophily_measure,
                "homophily_measure",
                homophily_measure(g, y, opts)
            );
            set!(
                attribute_assortativity,
                "attribute_assortativity",
                attribute_assortativity(g, y)
            );
            match x {
                Some(x) => match feature_similarities(g, x, y) {
                    Ok(sims) => {
                        match sims.in_sim {
                            Some(v) => out.in_feature_similarity = Some(v),
                            None => skipped.push((
                                "in_feature_similarity".into(),
                                "no same-label edges".into(),
                            )),
                        }
                        match sims.out_sim {
                            Some(v) => out.out_feature_similarity = Some(v),
                            None => skipped.push((
                                "out_feature_similarity".into(),
                                "no cross-label edges".into(),
                            )),
                        }
                        match sims.snr {
                            Some(v) => out.feature_angular_snr = Some(v),
                            None => skipped.push((
                                "feature_angular_snr".into(),
                                "undefined similarity ratio".into(),
                            )),
                        }
                    }
                    Err(e) => {
                        for name in [
                            "in_feature_similarity",
                            "out_feature_similarity",
                            "feature_angular_snr",
                        ] {
                            skipped.push((name.into(), e.to_string()));
                        }
                    }
                },
                None => {
                    for name in [
                        "in_feature_similarity",
                        "out_feature_similarity",
                        "feature_angular_snr",
                    ] {
                        skipped.push((name.into(), "missing input: features".into()));
                    }
                }
            }
        }
        None => {
            for name in [
                "edge_homogeneity",
                "homophily_measure",
                "attribute_assortativity",
            ] {
                skipped.push((name.into(), "missing input: labels".into()));
            }
            for name in [
                "in_feature_similarity",
                "out_feature_similarity",
                "feature_angular_snr",
            ] {
                skipped.push((
                    name.into(),
                    if x.is_none() {
                        "missing input: features and labels".into()
                    } else {
                        "missing input: labels".into()
                    },
                ));
            }
        }
    }

    out.skipped = skipped;
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> (Graph, FeatureMatrix, LabelVector) {
        // Triangle with a pendant: degrees are non-constant so every
        // structural statistic is defined.
        let g = Graph::build(4, false, vec![(0, 1, 1), (1, 2, 1), (0, 2, 1), (2, 3, 1)])
            .unwrap()
            .graph;
        let x = FeatureMatrix::new(ndarray::array![
            [1.0, 0.0],
            [0.9, 0.1],
            [0.0, 1.0],
            [0.4, 0.6]
        ])
        .unwrap();
        let y = LabelVector::from_labels(vec![0, 0, 1, 1]);
        (g, x, y)
    }

    #[test]
    fn full_inputs_populate_all_fifteen() {
        let (g, x, y) = toy();
        let pv = profile(&g, Some(&x), Some(&y), ProfileOptions::default());
        assert_eq!(pv.defined_count(), 15, "skipped: {:?}", pv.skipped);
        assert!(!pv.has_flags());
    }

    #[test]
    fn graph_only_flags_six() {
        let (g, _, _) = toy();
        let pv = profile(&g, None, None, ProfileOptions::default());
        assert_eq!(pv.defined_count(), 9, "skipped: {:?}", pv.skipped);
        assert_eq!(pv.skipped.len(), 6);
    }

    #[test]
    fn empty_graph_flags_degree_statistics() {
        let g = Graph::build(4, false, Vec::new()).unwrap().graph;
        let pv = profile(&g, None, None, ProfileOptions::default());
        assert!(pv.gini_degree.is_none());
        assert!(pv.degree_assortativity.is_none());
        assert_eq!(pv.edge_density, Some(0.0));
        assert_eq!(pv.transitivity, Some(0.0));
    }

    #[test]
    fn csv_row_has_empty_cells_for_flags() {
        let (g, _, _) = toy();
        let pv = profile(&g, None, None, ProfileOptions::default());
        let mut buf = Vec::new();
        pv.write_csv("toy", &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        let header = lines.next().unwrap();
        let row = lines.next().unwrap();
        assert_eq!(header.split(',').count(), 16);
        assert_eq!(row.split(',').count(), 16);
        assert!(row.ends_with(",,,,,"));
    }
}
