//! Visual variation grid for render scripts.

use rand::seq::index;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::model::StyleDescriptor;

pub const COLOR_SCHEMES: &[&str] = &["tab10", "viridis", "pastel", "mono_blue", "warm", "cool"];
pub const LEGENDS: &[&str] = &["upper_right", "upper_left", "lower_center", "outside_right"];
pub const GRIDS: &[&str] = &["none", "major", "dashed", "dotted"];
pub const FONTS: &[&str] = &["sans", "serif", "mono", "condensed"];
pub const TEXTURES: &[&str] = &["solid", "hatched", "dotted", "crosshatch"];

/// Number of distinct token combinations (the annotated flag is assigned
/// separately).
pub fn grid_size() -> usize {
    COLOR_SCHEMES.len() * LEGENDS.len() * GRIDS.len() * FONTS.len() * TEXTURES.len()
}

/// Decodes a grid index (mixed radix, texture fastest).
pub fn style_at(mut i: usize, annotated: bool) -> StyleDescriptor {
    let mut pick = |axis: &[&'static str]| {
        let tok = axis[i % axis.len()];
        i /= axis.len();
        tok.to_string()
    };
    let mark_texture = pick(TEXTURES);
    let font = pick(FONTS);
    let grid = pick(GRIDS);
    let legend = pick(LEGENDS);
    let color_scheme = pick(COLOR_SCHEMES);
    StyleDescriptor {
        color_scheme,
        legend,
        grid,
        font,
        mark_texture,
        annotated,
    }
}

/// The default style: first grid cell, annotated.
pub fn default_style() -> StyleDescriptor {
    style_at(0, true)
}

/// Number of unannotated scripts in a batch of `n`.
pub fn unannotated_count(n: usize, fraction: f64) -> usize {
    ((n as f64 * fraction) + 1e-9).floor() as usize
}

/// Draws `n` styles without replacement from the grid (reshuffling once the
/// grid is exhausted) and marks exactly `unannotated_count(n, fraction)` of
/// them unannotated.
pub fn sample_styles<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    unannotated_fraction: f64,
) -> Vec<StyleDescriptor> {
    let size = grid_size();
    let mut picks: Vec<usize> = Vec::with_capacity(n);
    while picks.len() < n {
        let want = (n - picks.len()).min(size);
        if want == size {
            let mut all: Vec<usize> = (0..size).collect();
            all.shuffle(rng);
            picks.extend(all);
        } else {
            picks.extend(index::sample(rng, size, want));
        }
    }
    let k = unannotated_count(n, unannotated_fraction).min(n);
    let mut annotated = vec![true; n];
    for i in index::sample(rng, n, k) {
        annotated[i] = false;
    }
    picks
        .into_iter()
        .zip(annotated)
        .map(|(i, a)| style_at(i, a))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashSet;

    #[test]
    fn grid_decoding_is_a_bijection() {
        let all: HashSet<_> = (0..grid_size()).map(|i| style_at(i, true)).collect();
        assert_eq!(all.len(), grid_size());
    }

    #[test]
    fn four_styles_are_distinct_and_half_unannotated() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let styles = sample_styles(&mut rng, 4, 0.5);
        let set: HashSet<_> = styles.iter().cloned().collect();
        assert_eq!(set.len(), 4);
        assert_eq!(styles.iter().filter(|s| !s.annotated).count(), 2);
    }

    #[test]
    fn unannotated_counts() {
        assert_eq!(unannotated_count(4, 0.5), 2);
        assert_eq!(unannotated_count(1, 0.5), 0);
        assert_eq!(unannotated_count(10, 0.3), 3);
        assert_eq!(unannotated_count(400, 0.5), 200);
    }

    #[test]
    fn whole_grid_then_wraps() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = grid_size();
        let styles = sample_styles(&mut rng, n, 0.0);
        let set: HashSet<_> = styles.iter().cloned().collect();
        assert_eq!(set.len(), n);
        let more = sample_styles(&mut rng, n + 3, 0.0);
        assert_eq!(more.len(), n + 3);
    }
}
