//! Median-cut palette construction.

use std::collections::HashMap;

pub type Rgb = [u8; 3];

/// Builds a palette of at most `max_colors` entries from a color histogram.
///
/// When the histogram already fits, its colors are returned sorted, which
/// makes the encode path lossless. Otherwise boxes are split at the
/// population-weighted median of their widest channel until `max_colors`
/// boxes exist; each box contributes its weighted mean color.
pub fn median_cut(histogram: &HashMap<Rgb, u64>, max_colors: usize) -> Vec<Rgb> {
    assert!(max_colors >= 1);
    let mut colors: Vec<(Rgb, u64)> = histogram.iter().map(|(&c, &n)| (c, n)).collect();
    colors.sort_unstable();
    if colors.len() <= max_colors {
        return colors.into_iter().map(|(c, _)| c).collect();
    }

    let mut boxes = vec![colors];
    while boxes.len() < max_colors {
        let pick = boxes
            .iter()
            .enumerate()
            .filter(|(_, b)| b.len() > 1)
            .map(|(i, b)| {
                let (ch, range) = widest_channel(b);
                (i, ch, range)
            })
            .max_by(|a, b| a.2.cmp(&b.2).then(b.0.cmp(&a.0)));
        let Some((i, ch, _)) = pick else { break };
        let mut b = boxes.swap_remove(i);
        b.sort_unstable_by_key(|&(c, _)| (c[ch], c));
        let total: u64 = b.iter().map(|e| e.1).sum();
        let mut acc = 0;
        let mut cut = 1;
        for (k, e) in b.iter().enumerate() {
            acc += e.1;
            if acc * 2 >= total {
                cut = k + 1;
                break;
            }
        }
        let cut = cut.clamp(1, b.len() - 1);
        let upper = b.split_off(cut);
        boxes.push(b);
        boxes.push(upper);
    }

    let mut palette: Vec<Rgb> = boxes.iter().map(|b| mean_color(b)).collect();
    palette.sort_unstable();
    palette.dedup();
    palette
}

fn widest_channel(b: &[(Rgb, u64)]) -> (usize, u8) {
    let mut lo = [255u8; 3];
    let mut hi = [0u8; 3];
    for (c, _) in b {
        for k in 0..3 {
            lo[k] = lo[k].min(c[k]);
            hi[k] = hi[k].max(c[k]);
        }
    }
    (0..3)
        .map(|k| (k, hi[k] - lo[k]))
        .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
        .expect("three channels")
}

fn mean_color(b: &[(Rgb, u64)]) -> Rgb {
    let total: u64 = b.iter().map(|e| e.1).sum::<u64>().max(1);
    let mut sum = [0u64; 3];
    for (c, n) in b {
        for k in 0..3 {
            sum[k] += c[k] as u64 * n;
        }
    }
    [0, 1, 2].map(|k| ((sum[k] + total / 2) / total) as u8)
}

/// Maps colors to their nearest palette index, caching lookups.
pub struct PaletteMapper<'a> {
    palette: &'a [Rgb],
    cache: HashMap<Rgb, u8>,
}

impl<'a> PaletteMapper<'a> {
    pub fn new(palette: &'a [Rgb]) -> Self {
        assert!(!palette.is_empty() && palette.len() <= 256);
        let cache = palette
            .iter()
            .enumerate()
            .map(|(i, &c)| (c, i as u8))
            .collect();
        PaletteMapper { palette, cache }
    }

    pub fn index(&mut self, c: Rgb) -> u8 {
        if let Some(&i) = self.cache.get(&c) {
            return i;
        }
        let dist = |p: &Rgb| -> i32 {
            (0..3)
                .map(|k| {
                    let d = p[k] as i32 - c[k] as i32;
                    d * d
                })
                .sum()
        };
        let best = self
            .palette
            .iter()
            .enumerate()
            .min_by_key(|(i, p)| (dist(p), *i))
            .map(|(i, _)| i as u8)
            .expect("non-empty palette");
        self.cache.insert(c, best);
        best
    }
}
