//! Named code configurations: the worked examples, a toy code and the
//! simulation table configurations.

use crate::codec::DecoderKind;
use crate::construction::{CodeConfig, LayerConfig};

/// A named configuration with its intended decoder.
#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub config: CodeConfig,
    pub decoder: DecoderKind,
    pub list: usize,
    /// Design minimum distance of the outer layer.
    pub design_dmin: usize,
    /// Published list-decoder estimate of the minimum distance, when available.
    pub estimated_dmin: Option<usize>,
}

fn cfg(layers: &[(usize, usize, Option<usize>)], profile: &str, crc: bool) -> CodeConfig {
    CodeConfig {
        layers: layers
            .iter()
            .map(|&(n, k, d)| LayerConfig::new(n, k, d))
            .collect(),
        profile: profile.to_string(),
        crc: crc.then(|| "0x61".to_string()),
    }
}

#[allow(clippy::too_many_arguments)]
fn preset(
    name: &'static str,
    layers: &[(usize, usize, Option<usize>)],
    profile: &str,
    crc: bool,
    decoder: DecoderKind,
    list: usize,
    design_dmin: usize,
    estimated_dmin: Option<usize>,
) -> Preset {
    Preset {
        name,
        config: cfg(layers, profile, crc),
        decoder,
        list,
        design_dmin,
        estimated_dmin,
    }
}

/// Every preset, examples first.
pub fn all() -> Vec<Preset> {
    use DecoderKind::*;
    vec![
        preset("example1", &[(8, 4, Some(4)), (32, 7, Some(8))], "bec:0.5", false, Ml, 1, 8, None),
        preset("example2", &[(4, 3, None), (32, 12, Some(8))], "bec:0.5", false, Ml, 1, 8, None),
        preset("toy", &[(2, 1, None), (8, 3, None)], "bec:0.5", false, SclBpc, 16, 2, None),
        preset(
            "dp128-29",
            &[(4, 2, None), (16, 8, None), (128, 19, Some(16))],
            "seq:5g",
            false,
            SclBpc,
            8,
            16,
            Some(32),
        ),
        preset(
            "dp128-64",
            &[(16, 13, None), (128, 51, Some(8))],
            "seq:5g",
            false,
            SclBpc,
            8,
            8,
            Some(8),
        ),
        preset(
            "cadp128-64",
            &[(16, 3, None), (128, 67, Some(8))],
            "seq:5g",
            true,
            SclBpc,
            8,
            8,
            Some(12),
        ),
        preset(
            "dp128-32",
            &[(4, 2, None), (8, 3, None), (16, 6, None), (128, 21, Some(16))],
            "seq:5g",
            false,
            SclBpc,
            8,
            16,
            Some(24),
        ),
        preset(
            "dp128-56",
            &[(8, 4, None), (128, 52, Some(16))],
            "seq:5g",
            false,
            SclBpc,
            8,
            16,
            Some(16),
        ),
        preset(
            "dp128-96",
            &[(4, 2, None), (128, 94, Some(8))],
            "seq:5g",
            false,
            SclBpc,
            8,
            8,
            Some(8),
        ),
        preset(
            "dp128-29-parallel",
            &[(2, 1, None), (8, 1, None), (32, 3, None), (128, 24, Some(16))],
            "dega:1.5",
            false,
            ParallelScl,
            2,
            16,
            Some(32),
        ),
        preset(
            "dp128-64-parallel",
            &[(2, 1, None), (8, 1, None), (32, 3, None), (128, 59, Some(8))],
            "dega:6",
            false,
            ParallelScl,
            4,
            8,
            Some(16),
        ),
        preset(
            "dp64-16",
            &[(4, 2, None), (16, 8, None), (64, 6, Some(16))],
            "seq:5g",
            false,
            Ml,
            1,
            16,
            Some(16),
        ),
        preset(
            "dp128-16",
            &[(4, 2, None), (16, 8, None), (128, 6, Some(32))],
            "seq:5g",
            false,
            Ml,
            1,
            32,
            Some(32),
        ),
        preset(
            "dp256-16",
            &[(4, 2, None), (16, 8, None), (256, 6, Some(64))],
            "seq:5g",
            false,
            Ml,
            1,
            64,
            Some(64),
        ),
        preset(
            "cadp64-16",
            &[(16, 11, None), (64, 11, Some(8))],
            "seq:5g",
            true,
            Ml,
            1,
            8,
            Some(16),
        ),
        preset(
            "cadp128-16",
            &[(16, 10, None), (128, 12, Some(32))],
            "seq:5g",
            true,
            Ml,
            1,
            32,
            Some(32),
        ),
    ]
}

/// The simulation-table configurations only.
pub fn table() -> Vec<Preset> {
    all()
        .into_iter()
        .filter(|p| p.name.starts_with("dp") || p.name.starts_with("cadp"))
        .collect()
}

pub fn find(name: &str) -> Option<Preset> {
    all().into_iter().find(|p| p.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_builds() {
        for p in all() {
            let code = p
                .config
                .build()
                .unwrap_or_else(|e| panic!("{}: {e}", p.name));
            assert_eq!(code.design_dmin(), p.design_dmin, "{}", p.name);
            assert!(code.outer().min_used_row_weight().unwrap() >= p.design_dmin);
        }
    }

    #[test]
    fn message_lengths() {
        let expect = [
            ("dp128-29", 29),
            ("dp128-64", 64),
            ("cadp128-64", 64),
            ("dp128-32", 32),
            ("dp128-56", 56),
            ("dp128-96", 96),
            ("dp128-29-parallel", 29),
            ("dp128-64-parallel", 64),
            ("dp64-16", 16),
            ("dp128-16", 16),
            ("dp256-16", 16),
            ("cadp64-16", 16),
            ("cadp128-16", 16),
        ];
        for (name, k) in expect {
            let code = find(name).unwrap().config.build().unwrap();
            assert_eq!(code.k(), k, "{name}");
        }
        assert_eq!(table().len(), expect.len());
    }
}
