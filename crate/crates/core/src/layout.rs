//! Descendant-level view geometry.
//!
//! A node sits at `x = level`, `y = log2(descendants + 1)`. Nodes low in the
//! plot (where many share a coordinate) get a small deterministic vertical
//! jitter. Thickness maps linearly onto 100 color bins over `[0, 4]` mm,
//! with anything thicker landing in the top bin.

use crate::error::{Error, Result};
use crate::tree::{BinaryTree, Region};

pub const BIN_COUNT: usize = 100;
pub const THICKNESS_CEILING_MM: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rgb(pub u8, pub u8, pub u8);

impl Rgb {
    pub fn hex(self) -> String {
        format!("#{:02x}{:02x}{:02x}", self.0, self.1, self.2)
    }
}

/// 100-shade ramp from dark blue through green and yellow to dark red.
#[derive(Debug, Clone)]
pub struct ColorMap {
    colors: Vec<Rgb>,
    hues: Vec<f64>,
}

impl Default for ColorMap {
    fn default() -> Self {
        Self::new()
    }
}

impl ColorMap {
    pub fn new() -> Self {
        let mut colors = Vec::with_capacity(BIN_COUNT);
        let mut hues = Vec::with_capacity(BIN_COUNT);
        for i in 0..BIN_COUNT {
            let f = i as f64 / (BIN_COUNT - 1) as f64;
            let hue = 240.0 * (1.0 - f);
            // Darker at both ends of the ramp.
            let lightness = 0.3 + 0.2 * (std::f64::consts::PI * f).sin();
            hues.push(hue);
            colors.push(hsl_to_rgb(hue, 1.0, lightness));
        }
        Self { colors, hues }
    }

    pub fn len(&self) -> usize {
        self.colors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.colors.is_empty()
    }

    pub fn color(&self, bin: u8) -> Rgb {
        self.colors[bin as usize]
    }

    pub fn hue(&self, bin: u8) -> f64 {
        self.hues[bin as usize]
    }
}

fn hsl_to_rgb(h: f64, s: f64, l: f64) -> Rgb {
    let c = (1.0 - (2.0 * l - 1.0).abs()) * s;
    let hp = h / 60.0;
    let x = c * (1.0 - (hp % 2.0 - 1.0).abs());
    let (r, g, b) = match hp as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = l - c / 2.0;
    let to8 = |v: f64| ((v + m) * 255.0).round().clamp(0.0, 255.0) as u8;
    Rgb(to8(r), to8(g), to8(b))
}

/// Height of a node with `descendants` proper descendants.
pub fn y_coordinate(descendants: usize) -> f64 {
    ((descendants + 1) as f64).log2()
}

fn lower_edge(bin: usize) -> f64 {
    bin as f64 * THICKNESS_CEILING_MM / BIN_COUNT as f64
}

/// Color bin of a thickness: `min(floor(t / 4 * 100), 99)`.
///
/// Bin `b` starts at the double nearest `b * 4 / 100`, so a thickness
/// written as `0.04` lands in bin 1 and its predecessor in bin 0.
pub fn color_bin(thickness: f64) -> Result<u8> {
    if !(thickness >= 0.0) {
        return Err(Error::InvalidThickness(thickness));
    }
    let scale = BIN_COUNT as f64 / THICKNESS_CEILING_MM;
    let mut bin = ((thickness * scale).floor() as i64).clamp(0, BIN_COUNT as i64 - 1) as usize;
    while bin + 1 < BIN_COUNT && lower_edge(bin + 1) <= thickness {
        bin += 1;
    }
    while bin > 0 && lower_edge(bin) > thickness {
        bin -= 1;
    }
    Ok(bin as u8)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayoutConfig {
    pub jitter_amplitude: f64,
    /// Nodes with `y` strictly below this get jittered.
    pub jitter_threshold: f64,
    /// Mixed into the jitter key; changing it reshuffles every offset.
    pub jitter_salt: u64,
}

impl Default for LayoutConfig {
    fn default() -> Self {
        Self {
            jitter_amplitude: 0.15,
            jitter_threshold: 3.0,
            jitter_salt: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DlNodePlacement {
    pub node_id: String,
    pub x: usize,
    pub y: f64,
    pub y_jittered: f64,
    /// `None` for a phantom root.
    pub color_bin: Option<u8>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DlLayout {
    pub subject_id: String,
    pub region: Region,
    /// One entry per tree node, in tree preorder.
    pub placements: Vec<DlNodePlacement>,
    /// Parent-child pairs as indices into `placements`.
    pub edges: Vec<(usize, usize)>,
    pub histogram: [u32; BIN_COUNT],
    /// `(min, max)` over nodes that carry a thickness.
    pub thickness_range: Option<(f64, f64)>,
}

impl DlLayout {
    pub fn edge_ids(&self) -> impl Iterator<Item = (&str, &str)> {
        self.edges.iter().map(|&(p, c)| {
            (self.placements[p].node_id.as_str(), self.placements[c].node_id.as_str())
        })
    }

    pub fn max_level(&self) -> usize {
        self.placements.iter().map(|p| p.x).max().unwrap_or(0)
    }
}

fn fnv1a(hash: &mut u64, bytes: &[u8]) {
    for &b in bytes {
        *hash ^= b as u64;
        *hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Deterministic offset in `[-amplitude, amplitude)` keyed by the node's
/// identity, independent of every other node.
pub fn jitter_offset(subject: &str, region: Region, node_id: &str, config: &LayoutConfig) -> f64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    fnv1a(&mut h, &config.jitter_salt.to_le_bytes());
    fnv1a(&mut h, subject.as_bytes());
    fnv1a(&mut h, &[0x1f, region.code() as u8, 0x1f]);
    fnv1a(&mut h, node_id.as_bytes());
    let unit = (splitmix64(h) >> 11) as f64 / (1u64 << 53) as f64;
    config.jitter_amplitude * (2.0 * unit - 1.0)
}

/// Fills `y_jittered` for every placement.
pub fn apply_jitter(
    placements: &mut [DlNodePlacement],
    subject: &str,
    region: Region,
    config: &LayoutConfig,
) {
    for p in placements {
        p.y_jittered = if p.y < config.jitter_threshold {
            p.y + jitter_offset(subject, region, &p.node_id, config)
        } else {
            p.y
        };
    }
}

pub fn build_layout(tree: &BinaryTree, config: &LayoutConfig) -> DlLayout {
    let desc = tree.all_descendant_counts();
    let levels = tree.all_levels();
    let mut histogram = [0u32; BIN_COUNT];
    let mut range: Option<(f64, f64)> = None;
    let mut placements = Vec::with_capacity(tree.node_count());
    let mut edges = Vec::with_capacity(tree.node_count().saturating_sub(1));
    for (i, node) in tree.nodes().iter().enumerate() {
        let color_bin = node.thickness.map(|t| color_bin(t).expect("tree thickness is valid"));
        if let (Some(t), Some(b)) = (node.thickness, color_bin) {
            histogram[b as usize] += 1;
            range = Some(match range {
                None => (t, t),
                Some((lo, hi)) => (lo.min(t), hi.max(t)),
            });
        }
        let y = y_coordinate(desc[i]);
        placements.push(DlNodePlacement {
            node_id: node.id.clone(),
            x: levels[i],
            y,
            y_jittered: y,
            color_bin,
        });
        if let Some(p) = node.parent() {
            edges.push((p.0, i));
        }
    }
    apply_jitter(&mut placements, &tree.subject_id, tree.region, config);
    DlLayout {
        subject_id: tree.subject_id.clone(),
        region: tree.region,
        placements,
        edges,
        histogram,
        thickness_range: range,
    }
}
