//! Radio propagation, coverage radii, and random interference graphs.

use std::path::Path;

use rand::distr::{Distribution, Uniform};
use rand::Rng;
use rand_distr::Poisson;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graphs::{ConstraintGraph, SensingGraph};

pub const DEFAULT_FREQUENCY_GHZ: f64 = 2.412;
pub const DEFAULT_AREA_SIDE_M: f64 = 10.0;
pub const DEFAULT_POWERS_DBM: [f64; 5] = [12.0, 14.0, 16.0, 18.0, 20.0];
pub const DEFAULT_EXPONENT: f64 = 4.3;

#[derive(Debug, Error)]
pub enum WirelessError {
    #[error("distance must be positive, got {0}")]
    NonPositiveDistance(f64),
    #[error("invalid radio parameter: {0}")]
    InvalidParam(String),
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum PathLossModel {
    /// `43.3 log10(d) + 11.5 + 20 log10(f)`, `d` in meters and `f` in GHz.
    ThreeGppIndoor { frequency_ghz: f64 },
    /// `10 alpha log10(d)`.
    Exponent { alpha: f64 },
}

impl PathLossModel {
    pub fn three_gpp(frequency_ghz: f64) -> Result<Self, WirelessError> {
        if !(frequency_ghz > 0.0 && frequency_ghz.is_finite()) {
            return Err(WirelessError::InvalidParam(format!(
                "frequency {frequency_ghz} GHz"
            )));
        }
        Ok(Self::ThreeGppIndoor { frequency_ghz })
    }

    pub fn exponent(alpha: f64) -> Result<Self, WirelessError> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(WirelessError::InvalidParam(format!("exponent {alpha}")));
        }
        Ok(Self::Exponent { alpha })
    }

    /// Loss in dB as `slope * log10(d) + offset`.
    fn slope_offset(self) -> (f64, f64) {
        match self {
            Self::ThreeGppIndoor { frequency_ghz } => (43.3, 11.5 + 20.0 * frequency_ghz.log10()),
            Self::Exponent { alpha } => (10.0 * alpha, 0.0),
        }
    }
}

pub fn path_loss_db(model: PathLossModel, d: f64) -> Result<f64, WirelessError> {
    if d.is_nan() || d <= 0.0 {
        return Err(WirelessError::NonPositiveDistance(d));
    }
    let (slope, offset) = model.slope_offset();
    Ok(slope * d.log10() + offset)
}

/// Distance at which the received power `p_tx - PL(d)` falls to
/// `threshold_dbm`. Returns 0 when no positive finite radius exists.
pub fn coverage_radius(model: PathLossModel, p_tx_dbm: f64, threshold_dbm: f64) -> f64 {
    let (slope, offset) = model.slope_offset();
    let d = 10f64.powf((p_tx_dbm - threshold_dbm - offset) / slope);
    if d.is_finite() && d > 0.0 {
        d
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub x: f64,
    pub y: f64,
    /// Height from the input file; distances are planar.
    #[serde(default)]
    pub z: f64,
    pub tx_power_dbm: f64,
    pub threshold_dbm: f64,
}

impl Node {
    pub fn distance(&self, other: &Node) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DbmConfig {
    /// Points per square meter.
    pub intensity: f64,
    pub area_side: f64,
    pub power_set: Vec<f64>,
    pub detection_threshold_dbm: f64,
    pub frequency_ghz: f64,
}

impl DbmConfig {
    pub fn new(intensity: f64, detection_threshold_dbm: f64) -> Self {
        Self {
            intensity,
            area_side: DEFAULT_AREA_SIDE_M,
            power_set: DEFAULT_POWERS_DBM.to_vec(),
            detection_threshold_dbm,
            frequency_ghz: DEFAULT_FREQUENCY_GHZ,
        }
    }

    pub fn expected_points(&self) -> f64 {
        self.intensity * self.area_side * self.area_side
    }

    fn validate(&self) -> Result<PathLossModel, WirelessError> {
        if !(self.intensity > 0.0 && self.intensity.is_finite()) {
            return Err(WirelessError::InvalidParam(format!(
                "intensity {}",
                self.intensity
            )));
        }
        if !(self.area_side > 0.0 && self.area_side.is_finite()) {
            return Err(WirelessError::InvalidParam(format!(
                "area side {}",
                self.area_side
            )));
        }
        validate_powers(&self.power_set)?;
        PathLossModel::three_gpp(self.frequency_ghz)
    }
}

fn validate_powers(powers: &[f64]) -> Result<(), WirelessError> {
    if powers.is_empty() || powers.iter().any(|p| !p.is_finite()) {
        return Err(WirelessError::InvalidParam(format!("power set {powers:?}")));
    }
    Ok(())
}

/// A generated or ingested instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub graph: ConstraintGraph,
    pub sensing: SensingGraph,
    pub nodes: Vec<Node>,
}

/// Directed Boolean model: `y -> z` whenever `z` lies in the ball of radius
/// `radii[y]` around `y`. The constraint graph is the symmetric closure.
pub fn boolean_model_graphs(nodes: &[Node], radii: &[f64]) -> (ConstraintGraph, SensingGraph) {
    assert_eq!(nodes.len(), radii.len());
    let n = nodes.len();
    let mut edges = Vec::new();
    for y in 0..n {
        for z in 0..n {
            if y != z && nodes[y].distance(&nodes[z]) <= radii[y] {
                edges.push((y, z));
            }
        }
    }
    let sensing = SensingGraph::from_edges(n, edges).expect("indices are in range");
    (sensing.symmetric_closure(), sensing)
}

/// Samples a Poisson number of uniform points in the square, draws a
/// transmit power per point, and builds the directed Boolean model.
pub fn generate_dbm<R: Rng + ?Sized>(
    cfg: &DbmConfig,
    rng: &mut R,
) -> Result<Instance, WirelessError> {
    let model = cfg.validate()?;
    let n = Poisson::new(cfg.expected_points())
        .map_err(|e| WirelessError::InvalidParam(e.to_string()))?
        .sample(rng) as usize;
    let coord = Uniform::new(0.0, cfg.area_side).expect("area side is positive");
    let nodes: Vec<Node> = (0..n)
        .map(|_| {
            let x = coord.sample(rng);
            let y = coord.sample(rng);
            let tx_power_dbm = cfg.power_set[rng.random_range(0..cfg.power_set.len())];
            Node {
                x,
                y,
                z: 0.0,
                tx_power_dbm,
                threshold_dbm: cfg.detection_threshold_dbm,
            }
        })
        .collect();
    let radii: Vec<f64> = nodes
        .iter()
        .map(|nd| coverage_radius(model, nd.tx_power_dbm, nd.threshold_dbm))
        .collect();
    let (graph, sensing) = boolean_model_graphs(&nodes, &radii);
    Ok(Instance {
        graph,
        sensing,
        nodes,
    })
}

/// Which side of an interfering pair observes the conflict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum AllocationMode {
    /// Channel selection: `i` senses `j` when `j`'s signal reaches `i`
    /// above `Q_i`.
    #[default]
    Channel,
    /// Slot scheduling: `i` senses `j` when `i`'s signal reaches `j` above
    /// `Q_j`, i.e. `j`'s transmission fails.
    Tdma,
}

/// Whether `from`'s transmission is received at `to` at or above `to`'s
/// threshold. Coincident nodes always interfere.
fn reaches(model: PathLossModel, from: &Node, to: &Node) -> bool {
    let d = from.distance(to);
    if d <= 0.0 {
        log::warn!(
            "coincident nodes at ({}, {}); forcing an interference edge",
            from.x,
            from.y
        );
        return true;
    }
    let (slope, offset) = model.slope_offset();
    from.tx_power_dbm - (slope * d.log10() + offset) >= to.threshold_dbm
}

pub fn build_interference_graph(
    nodes: &[Node],
    model: PathLossModel,
    mode: AllocationMode,
) -> (ConstraintGraph, SensingGraph) {
    let n = nodes.len();
    let mut edges = Vec::new();
    for j in 0..n {
        for i in 0..n {
            if i == j {
                continue;
            }
            let sensed = match mode {
                AllocationMode::Channel => reaches(model, &nodes[j], &nodes[i]),
                AllocationMode::Tdma => reaches(model, &nodes[i], &nodes[j]),
            };
            if sensed {
                edges.push((j, i));
            }
        }
    }
    let sensing = SensingGraph::from_edges(n, edges).expect("indices are in range");
    (sensing.symmetric_closure(), sensing)
}

/// A point read from a coordinate file, before powers are assigned.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Position {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

/// Parses whitespace-separated `x y z` rows. Blank lines and `#` comments
/// are skipped.
pub fn parse_xyz(text: &str, path: &str) -> Result<Vec<Position>, WirelessError> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let err = |msg: String| WirelessError::Parse {
            path: path.to_string(),
            line: idx + 1,
            msg,
        };
        let vals = body
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| err(format!("not a finite number: `{t}`")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        if vals.len() != 3 {
            return Err(err(format!("expected 3 coordinates, got {}", vals.len())));
        }
        out.push(Position {
            x: vals[0],
            y: vals[1],
            z: vals[2],
        });
    }
    Ok(out)
}

pub fn read_xyz(path: &Path) -> Result<Vec<Position>, WirelessError> {
    let text = std::fs::read_to_string(path).map_err(|source| WirelessError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_xyz(&text, &path.display().to_string())
}

/// Turns positions into nodes with transmit powers drawn uniformly from
/// `powers`.
pub fn assign_powers<R: Rng + ?Sized>(
    positions: &[Position],
    powers: &[f64],
    threshold_dbm: f64,
    rng: &mut R,
) -> Result<Vec<Node>, WirelessError> {
    validate_powers(powers)?;
    Ok(positions
        .iter()
        .map(|p| Node {
            x: p.x,
            y: p.y,
            z: p.z,
            tx_power_dbm: powers[rng.random_range(0..powers.len())],
            threshold_dbm,
        })
        .collect())
}

/// Reads a coordinate file and assigns random transmit powers.
pub fn ingest_xyz<R: Rng + ?Sized>(
    path: &Path,
    powers: &[f64],
    threshold_dbm: f64,
    rng: &mut R,
) -> Result<Vec<Node>, WirelessError> {
    assign_powers(&read_xyz(path)?, powers, threshold_dbm, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn node(x: f64, y: f64, p: f64, q: f64) -> Node {
        Node {
            x,
            y,
            z: 0.0,
            tx_power_dbm: p,
            threshold_dbm: q,
        }
    }

    fn gpp() -> PathLossModel {
        PathLossModel::three_gpp(DEFAULT_FREQUENCY_GHZ).unwrap()
    }

    #[test]
    fn path_loss_examples() {
        // 43.3 + 11.5 + 20 log10(2.412) = 62.44755
        assert!((path_loss_db(gpp(), 10.0).unwrap() - 62.447_546).abs() < 1e-5);
        assert!((path_loss_db(gpp(), 1.0).unwrap() - 19.147_546).abs() < 1e-5);
        let exp = PathLossModel::exponent(4.3).unwrap();
        assert!((path_loss_db(exp, 10.0).unwrap() - 43.0).abs() < 1e-12);
        assert!(path_loss_db(gpp(), 0.0).is_err());
        assert!(path_loss_db(gpp(), -1.0).is_err());
    }

    #[test]
    fn coverage_radius_examples() {
        assert!((coverage_radius(gpp(), 20.0, -25.0) - 3.954).abs() < 0.01);
        let exp = PathLossModel::exponent(4.3).unwrap();
        assert!((coverage_radius(exp, 18.0, -45.0) - 29.17).abs() < 0.05);
        assert!(coverage_radius(gpp(), 20.0, -15.0) < coverage_radius(gpp(), 20.0, -25.0));
    }

    #[test]
    fn invalid_models_rejected() {
        assert!(PathLossModel::three_gpp(0.0).is_err());
        assert!(PathLossModel::exponent(-2.0).is_err());
    }

    #[test]
    fn nearby_pair_interferes_both_ways() {
        let nodes = [node(0.0, 0.0, 18.0, -45.0), node(1.0, 0.0, 18.0, -45.0)];
        let (g, s) = build_interference_graph(&nodes, gpp(), AllocationMode::Channel);
        assert!(g.has_edge(0, 1));
        assert!(s.has_edge(0, 1) && s.has_edge(1, 0));
    }

    #[test]
    fn asymmetric_powers_give_hidden_terminal() {
        // Distance 4 m: loss = 43.3 * log10(4) + 19.149 ~ 45.22 dB.
        // 20 - 45.22 = -25.22 >= -30, but 0 - 45.22 = -45.22 < -30.
        let nodes = [node(0.0, 0.0, 20.0, -30.0), node(4.0, 0.0, 0.0, -30.0)];
        let (g, s) = build_interference_graph(&nodes, gpp(), AllocationMode::Channel);
        assert!(s.has_edge(0, 1));
        assert!(!s.has_edge(1, 0));
        assert!(g.has_edge(0, 1) && g.has_edge(1, 0));
        let (g_tdma, s_tdma) = build_interference_graph(&nodes, gpp(), AllocationMode::Tdma);
        assert_eq!(g_tdma, g);
        assert_eq!(s_tdma, s.transpose());
    }

    #[test]
    fn distant_nodes_have_no_edges() {
        let nodes = [
            node(0.0, 0.0, 12.0, -15.0),
            node(100.0, 0.0, 12.0, -15.0),
            node(0.0, 100.0, 12.0, -15.0),
        ];
        let (g, s) = build_interference_graph(&nodes, gpp(), AllocationMode::Channel);
        assert_eq!(g.n_edges(), 0);
        assert_eq!(s.n_edges(), 0);
    }

    #[test]
    fn coincident_nodes_forced_adjacent() {
        let nodes = [node(1.0, 1.0, 12.0, 100.0), node(1.0, 1.0, 12.0, 100.0)];
        let (g, _) = build_interference_graph(&nodes, gpp(), AllocationMode::Channel);
        assert!(g.has_edge(0, 1));
    }

    #[test]
    fn zero_radii_give_edgeless_graphs() {
        let nodes: Vec<Node> = (0..6).map(|i| node(i as f64, 0.5, 12.0, 0.0)).collect();
        let (g, s) = boolean_model_graphs(&nodes, &[0.0; 6]);
        assert_eq!(g.n_edges(), 0);
        assert_eq!(s.n_edges(), 0);
    }

    #[test]
    fn dbm_edges_follow_radii() {
        let cfg = DbmConfig::new(0.5, -25.0);
        let model = gpp();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let inst = generate_dbm(&cfg, &mut rng).unwrap();
            assert!(inst.sensing.validate_subset(&inst.graph).is_ok());
            assert_eq!(inst.sensing.symmetric_closure(), inst.graph);
            for (y, ny) in inst.nodes.iter().enumerate() {
                assert!(cfg.power_set.contains(&ny.tx_power_dbm));
                let r = coverage_radius(model, ny.tx_power_dbm, ny.threshold_dbm);
                for (z, nz) in inst.nodes.iter().enumerate() {
                    if y != z {
                        assert_eq!(inst.sensing.has_edge(y, z), ny.distance(nz) <= r);
                    }
                }
            }
        }
    }

    #[test]
    fn dbm_rejects_bad_config() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut cfg = DbmConfig::new(0.0, -25.0);
        assert!(generate_dbm(&cfg, &mut rng).is_err());
        cfg.intensity = 0.5;
        cfg.power_set.clear();
        assert!(generate_dbm(&cfg, &mut rng).is_err());
    }

    #[test]
    fn xyz_parsing() {
        let pos = parse_xyz("0 0 0\n3 4 0\n", "mem").unwrap();
        assert_eq!(pos.len(), 2);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let nodes = assign_powers(&pos, &DEFAULT_POWERS_DBM, -45.0, &mut rng).unwrap();
        assert_eq!(nodes[0].distance(&nodes[1]), 5.0);

        let pos = parse_xyz("# header\n\n1 2 3  # trailing\n", "mem").unwrap();
        assert_eq!(
            pos,
            vec![Position {
                x: 1.0,
                y: 2.0,
                z: 3.0
            }]
        );
        assert!(parse_xyz("", "mem").unwrap().is_empty());

        match parse_xyz("0 0 0\n1 two 3\n", "f.txt") {
            Err(WirelessError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse_xyz("1 2\n", "f.txt"),
            Err(WirelessError::Parse { line: 1, .. })
        ));
    }
}
