//! Rate-profiling and assembly of deep polar codes.
//!
//! A code is a stack of layers with strictly increasing blocklengths. Every
//! layer but the last maps its input through `G^T`; the last layer applies
//! the forward transform `G`. The output of layer `l - 1` feeds the
//! connection set of layer `l` in ascending index order.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::codec::crc::CrcSpec;
use crate::error::{invalid, Error, Result};
use crate::gf2::{row_weight, transpose_row_weight, BitVector, Gf2Matrix};
use crate::reliability::{ProfileSource, ReliabilityProfile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// `v = u G^T`, used by every inner layer.
    Transpose,
    /// `x = u G`, used by the outermost layer.
    Forward,
}

/// Role of one input position of a layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BitRole {
    Frozen,
    /// Position within the layer's information set (ascending order).
    Info(usize),
    /// Position within the layer's connection set (ascending order).
    Connection(usize),
}

/// One encoding layer with its partition of `[N_l]`. Index sets are 1-based and ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayerSpec {
    n: usize,
    d_min: usize,
    info: Vec<usize>,
    connection: Vec<usize>,
    frozen: Vec<usize>,
    direction: Direction,
    roles: Vec<BitRole>,
}

impl LayerSpec {
    /// Validates that `info` and `connection` are disjoint subsets of `[n]` and
    /// fills the frozen set with the remainder.
    pub fn new(
        n: usize,
        d_min: usize,
        info: Vec<usize>,
        connection: Vec<usize>,
        direction: Direction,
    ) -> Result<Self> {
        if n == 0 || !n.is_power_of_two() {
            return Err(invalid(format!("layer size {n} is not a power of two")));
        }
        let mut roles = vec![BitRole::Frozen; n];
        let mut info = info;
        let mut connection = connection;
        info.sort_unstable();
        connection.sort_unstable();
        for (j, &i) in info.iter().enumerate() {
            if i == 0 || i > n || roles[i - 1] != BitRole::Frozen {
                return Err(Error::ConstructionInfeasible(format!(
                    "information index {i} is out of range or repeated in layer N = {n}"
                )));
            }
            roles[i - 1] = BitRole::Info(j);
        }
        for (j, &i) in connection.iter().enumerate() {
            if i == 0 || i > n || roles[i - 1] != BitRole::Frozen {
                return Err(Error::ConstructionInfeasible(format!(
                    "connection index {i} is out of range or overlaps in layer N = {n}"
                )));
            }
            roles[i - 1] = BitRole::Connection(j);
        }
        let frozen = (1..=n).filter(|&i| roles[i - 1] == BitRole::Frozen).collect();
        Ok(Self {
            n,
            d_min,
            info,
            connection,
            frozen,
            direction,
            roles,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.info.len()
    }

    pub fn d_min(&self) -> usize {
        self.d_min
    }

    pub fn info(&self) -> &[usize] {
        &self.info
    }

    pub fn connection(&self) -> &[usize] {
        &self.connection
    }

    pub fn frozen(&self) -> &[usize] {
        &self.frozen
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    /// Role of the 1-based index `i`.
    pub fn role(&self, i: usize) -> BitRole {
        self.roles[i - 1]
    }

    pub fn roles(&self) -> &[BitRole] {
        &self.roles
    }

    /// Smallest weight among the generator rows carrying information or connection bits.
    pub fn min_used_row_weight(&self) -> Option<usize> {
        self.info
            .iter()
            .chain(&self.connection)
            .map(|&i| layer_row_weight(self.n, i, self.direction))
            .min()
    }
}

fn layer_row_weight(n: usize, i: usize, direction: Direction) -> usize {
    match direction {
        Direction::Forward => row_weight(n, i).expect("index in range"),
        Direction::Transpose => transpose_row_weight(n, i).expect("index in range"),
    }
}

/// Indices whose row of `G_N` has weight at least `d_min`, ascending.
pub fn rm_mask(n: usize, d_min: usize) -> Vec<usize> {
    rm_mask_for(n, d_min, Direction::Forward)
}

/// Like [`rm_mask`], measuring rows of `G_N^T` for transpose layers.
pub fn rm_mask_for(n: usize, d_min: usize, direction: Direction) -> Vec<usize> {
    (1..=n)
        .filter(|&i| layer_row_weight(n, i, direction) >= d_min)
        .collect()
}

/// Reliability order of the indices of a layer, most reliable first.
///
/// A transpose layer satisfies `G^T = J G J` with `J` the reversal, so its
/// index `i` is ranked with the value of index `N + 1 - i` of the forward
/// profile, and ties go to the smaller index.
fn layer_ranking(profile: &ReliabilityProfile, direction: Direction) -> Vec<usize> {
    match direction {
        Direction::Forward => profile.ranking(),
        Direction::Transpose => {
            let n = profile.n();
            profile.ranking().into_iter().map(|i| n + 1 - i).collect()
        }
    }
}

/// Selects the information set (the `k` most reliable indices inside the
/// weight mask) and the connection set (the next `n_prev` indices) of an
/// outer, forward-transform layer.
pub fn build_layer(
    n: usize,
    k: usize,
    d_min: usize,
    profile: &ReliabilityProfile,
    n_prev: usize,
) -> Result<LayerSpec> {
    build_layer_with(n, k, d_min, profile, n_prev, Direction::Forward)
}

pub fn build_layer_with(
    n: usize,
    k: usize,
    d_min: usize,
    profile: &ReliabilityProfile,
    n_prev: usize,
    direction: Direction,
) -> Result<LayerSpec> {
    if profile.n() != n {
        return Err(invalid(format!(
            "profile covers N = {} but the layer has N = {n}",
            profile.n()
        )));
    }
    if d_min == 0 {
        return Err(invalid("d_min must be at least 1"));
    }
    let mask: BTreeSet<usize> = rm_mask_for(n, d_min, direction).into_iter().collect();
    if k + n_prev > mask.len() {
        return Err(Error::ConstructionInfeasible(format!(
            "layer N = {n} with d_min = {d_min} has {} admissible rows, cannot host K = {k} plus {n_prev} connection bits",
            mask.len()
        )));
    }
    let ordered: Vec<usize> = layer_ranking(profile, direction)
        .into_iter()
        .filter(|i| mask.contains(i))
        .collect();
    let info = ordered[..k].to_vec();
    let connection = ordered[k..k + n_prev].to_vec();
    LayerSpec::new(n, d_min, info, connection, direction)
}

/// Largest power of two `d` for which the weight mask can host `k + n_prev` indices.
pub fn default_layer_dmin(n: usize, k: usize, n_prev: usize, direction: Direction) -> Option<usize> {
    let mut d = n;
    while d >= 1 {
        if rm_mask_for(n, d, direction).len() >= k + n_prev {
            return Some(d);
        }
        d /= 2;
    }
    None
}

/// A validated deep polar code.
#[derive(Debug, Clone, PartialEq)]
pub struct DeepPolarCode {
    layers: Vec<LayerSpec>,
    crc: Option<CrcSpec>,
    k: usize,
    profile: String,
}

impl DeepPolarCode {
    /// Assembles a code from layers listed innermost first.
    pub fn from_layers(layers: Vec<LayerSpec>, crc: Option<CrcSpec>) -> Result<Self> {
        if layers.is_empty() {
            return Err(invalid("a code needs at least one layer"));
        }
        let last = layers.len() - 1;
        for (l, layer) in layers.iter().enumerate() {
            let want = if l == last {
                Direction::Forward
            } else {
                Direction::Transpose
            };
            if layer.direction != want {
                return Err(Error::ConstructionInfeasible(format!(
                    "layer {} must use the {:?} transform",
                    l + 1,
                    want
                )));
            }
            let n_prev = if l == 0 { 0 } else { layers[l - 1].n };
            if l > 0 && layers[l - 1].n >= layer.n {
                return Err(Error::ConstructionInfeasible(format!(
                    "layer sizes must strictly increase (N_{} = {} >= N_{} = {})",
                    l,
                    layers[l - 1].n,
                    l + 1,
                    layer.n
                )));
            }
            if layer.connection.len() != n_prev {
                return Err(Error::ConstructionInfeasible(format!(
                    "layer {} has {} connection bits but the previous layer outputs {n_prev}",
                    l + 1,
                    layer.connection.len()
                )));
            }
        }
        let ext: usize = layers.iter().map(LayerSpec::k).sum();
        let crc_bits = crc.map_or(0, |c| c.degree());
        if ext <= crc_bits {
            return Err(Error::ConstructionInfeasible(format!(
                "sum of K_l = {ext} leaves no message bits after a {crc_bits}-bit CRC"
            )));
        }
        Ok(Self {
            layers,
            crc,
            k: ext - crc_bits,
            profile: String::new(),
        })
    }

    /// Single-layer polar code with an explicit information set.
    pub fn plain(n: usize, info: Vec<usize>, crc: Option<CrcSpec>) -> Result<Self> {
        let layer = LayerSpec::new(n, 1, info, Vec::new(), Direction::Forward)?;
        let d_min = layer.min_used_row_weight().unwrap_or(1);
        let layer = LayerSpec { d_min, ..layer };
        Self::from_layers(vec![layer], crc)
    }

    pub fn with_profile_label(mut self, label: impl Into<String>) -> Self {
        self.profile = label.into();
        self
    }

    pub fn profile_label(&self) -> &str {
        &self.profile
    }

    /// Layers innermost first.
    pub fn layers(&self) -> &[LayerSpec] {
        &self.layers
    }

    pub fn outer(&self) -> &LayerSpec {
        self.layers.last().expect("non-empty")
    }

    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }

    pub fn n(&self) -> usize {
        self.outer().n
    }

    /// Message length (CRC bits excluded).
    pub fn k(&self) -> usize {
        self.k
    }

    /// `sum K_l`, i.e. message plus CRC.
    pub fn extended_k(&self) -> usize {
        self.layers.iter().map(LayerSpec::k).sum()
    }

    /// Bits carried by the inner layers (`sum K_l - K_L`).
    pub fn inner_k(&self) -> usize {
        self.extended_k() - self.outer().k()
    }

    pub fn rate(&self) -> f64 {
        self.k as f64 / self.n() as f64
    }

    pub fn crc(&self) -> Option<&CrcSpec> {
        self.crc.as_ref()
    }

    pub fn design_dmin(&self) -> usize {
        self.outer().d_min
    }

    /// Short human-readable description.
    pub fn summary(&self) -> String {
        let layers: Vec<String> = self
            .layers
            .iter()
            .map(|l| format!("({},{})", l.n, l.k()))
            .collect();
        format!(
            "({},{}) layers {} d_L={}{}",
            self.n(),
            self.k,
            layers.join(","),
            self.design_dmin(),
            self.crc.map_or(String::new(), |c| format!(" crc={c}"))
        )
    }
}

/// JSON code description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodeConfig {
    pub layers: Vec<LayerConfig>,
    pub profile: String,
    #[serde(default)]
    pub crc: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerConfig {
    pub n: usize,
    pub k: usize,
    /// Target minimum row weight; chosen automatically when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dmin: Option<usize>,
    /// Explicit 1-based information set, bypassing selection.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub info: Option<Vec<usize>>,
    /// Explicit 1-based connection set, used together with `info`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub connection: Option<Vec<usize>>,
}

impl LayerConfig {
    pub fn new(n: usize, k: usize, dmin: Option<usize>) -> Self {
        Self {
            n,
            k,
            dmin,
            info: None,
            connection: None,
        }
    }
}

impl CodeConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Builds the code, resolving relative sequence paths against `base_dir`.
    pub fn build_with_base(&self, base_dir: Option<&Path>) -> Result<DeepPolarCode> {
        let source = ProfileSource::parse_with_base(&self.profile, base_dir)?;
        let crc = self.crc.as_deref().map(str::parse::<CrcSpec>).transpose()?;
        build_code(&self.layers, &source, crc)
    }

    pub fn build(&self) -> Result<DeepPolarCode> {
        self.build_with_base(None)
    }
}

/// Builds and validates a deep polar code.
///
/// `layers` may be listed in either size order; they are stored ascending.
/// Every layer's profile uses the same channel parameters, with the DEGA
/// noise variance taken from the overall code rate.
pub fn build_code(
    layers: &[LayerConfig],
    source: &ProfileSource,
    crc: Option<CrcSpec>,
) -> Result<DeepPolarCode> {
    if layers.is_empty() {
        return Err(invalid("a code needs at least one layer"));
    }
    let mut sorted = layers.to_vec();
    if sorted.len() > 1 && sorted[0].n > sorted[sorted.len() - 1].n {
        sorted.reverse();
    }
    for w in sorted.windows(2) {
        if w[0].n >= w[1].n {
            return Err(Error::ConstructionInfeasible(format!(
                "layer sizes must be strictly monotone, got {} then {}",
                w[0].n, w[1].n
            )));
        }
    }
    let ext: usize = sorted.iter().map(|l| l.k).sum();
    let crc_bits = crc.map_or(0, |c| c.degree());
    if ext <= crc_bits {
        return Err(Error::ConstructionInfeasible(format!(
            "sum of K_l = {ext} leaves no message bits after a {crc_bits}-bit CRC"
        )));
    }
    let n_outer = sorted.last().unwrap().n;
    let rate = (ext - crc_bits) as f64 / n_outer as f64;

    let last = sorted.len() - 1;
    let mut built = Vec::with_capacity(sorted.len());
    for (l, cfg) in sorted.iter().enumerate() {
        let n_prev = if l == 0 { 0 } else { sorted[l - 1].n };
        let direction = if l == last {
            Direction::Forward
        } else {
            Direction::Transpose
        };
        let layer = if let Some(info) = &cfg.info {
            let connection = cfg.connection.clone().unwrap_or_default();
            if info.len() != cfg.k {
                return Err(Error::ConstructionInfeasible(format!(
                    "layer {} lists {} information indices but K = {}",
                    l + 1,
                    info.len(),
                    cfg.k
                )));
            }
            let spec = LayerSpec::new(cfg.n, 1, info.clone(), connection, direction)?;
            let d_min = cfg
                .dmin
                .unwrap_or_else(|| spec.min_used_row_weight().unwrap_or(1));
            LayerSpec { d_min, ..spec }
        } else {
            let d_min = match cfg.dmin {
                Some(d) => d,
                None => default_layer_dmin(cfg.n, cfg.k, n_prev, direction).ok_or_else(|| {
                    Error::ConstructionInfeasible(format!(
                        "layer {} (N = {}) cannot host K = {} plus {n_prev} connection bits",
                        l + 1,
                        cfg.n,
                        cfg.k
                    ))
                })?,
            };
            let profile = source.profile(cfg.n, rate)?;
            build_layer_with(cfg.n, cfg.k, d_min, &profile, n_prev, direction).map_err(|e| {
                match e {
                    Error::ConstructionInfeasible(m) => {
                        Error::ConstructionInfeasible(format!("layer {}: {m}", l + 1))
                    }
                    other => other,
                }
            })?
        };
        built.push(layer);
    }
    Ok(DeepPolarCode::from_layers(built, crc)?.with_profile_label(source.describe()))
}

/// Row images of `G_N^T` scattered onto the columns listed in `cols` (0-based).
fn scatter_rows(src: &Gf2Matrix, cols: &[usize], n: usize) -> Vec<BitVector> {
    src.rows()
        .iter()
        .map(|r| {
            let mut out = BitVector::zeros(n);
            for j in r.ones_positions() {
                out.set(cols[j], true);
            }
            out
        })
        .collect()
}

/// The `N x N` pre-transform `T` of the outer layer: encoding equals
/// `w T G_N` with `w = [u_F (zeros), u_{L-1}, u_I]` (see [`pretransform_input`]).
///
/// Rows for `u_F` are zero, the next `N_{L-1}` rows place `G^T_{N_{L-1}}` on the
/// connection columns, and the last `K_L` rows are identity rows on the
/// information columns.
pub fn unified_pretransform(code: &DeepPolarCode) -> Gf2Matrix {
    let outer = code.outer();
    let n = outer.n();
    let mut rows = vec![BitVector::zeros(n); outer.frozen().len()];
    if code.num_layers() > 1 {
        let inner_n = code.layers()[code.num_layers() - 2].n();
        let gt = Gf2Matrix::polar_kernel(inner_n)
            .expect("power of two")
            .transpose();
        let cols: Vec<usize> = outer.connection().iter().map(|i| i - 1).collect();
        rows.extend(scatter_rows(&gt, &cols, n));
    }
    for &i in outer.info() {
        rows.push(BitVector::unit(n, i - 1));
    }
    Gf2Matrix::from_rows(rows, n).expect("rows have length N")
}

/// Input vector `w` matching [`unified_pretransform`] for the extended message
/// `d_ext` (message plus CRC). The inner layers are evaluated with explicit
/// dense matrices.
pub fn pretransform_input(code: &DeepPolarCode, d_ext: &BitVector) -> Result<BitVector> {
    if d_ext.len() != code.extended_k() {
        return Err(invalid(format!(
            "extended message has {} bits, code expects {}",
            d_ext.len(),
            code.extended_k()
        )));
    }
    let layers = code.layers();
    let mut offset = 0;
    let mut prev_out: Option<BitVector> = None;
    let mut inner_input = BitVector::zeros(0);
    for (l, layer) in layers.iter().enumerate().take(layers.len() - 1) {
        let mut u = BitVector::zeros(layer.n());
        for (j, &i) in layer.info().iter().enumerate() {
            u.set(i - 1, d_ext.get(offset + j));
        }
        offset += layer.k();
        if let Some(v) = &prev_out {
            for (j, &i) in layer.connection().iter().enumerate() {
                u.set(i - 1, v.get(j));
            }
        }
        let gt = Gf2Matrix::polar_kernel(layer.n())?.transpose();
        prev_out = Some(gt.left_mul(&u)?);
        if l == layers.len() - 2 {
            inner_input = u;
        }
    }
    let outer = code.outer();
    let mut w = BitVector::zeros(outer.frozen().len());
    w = w.concat(&inner_input);
    w = w.concat(&d_ext.slice(offset, d_ext.len()));
    Ok(w)
}
