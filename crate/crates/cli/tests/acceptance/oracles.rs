//! Reference computations written without the library's code paths.

/// Full Wagner-Fischer table.
pub fn edit_distance<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut d = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for (i, row) in d.iter_mut().enumerate() {
        row[0] = i;
    }
    for (j, cell) in d[0].iter_mut().enumerate() {
        *cell = j;
    }
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let sub = d[i - 1][j - 1] + usize::from(a[i - 1] != b[j - 1]);
            d[i][j] = sub.min(d[i - 1][j] + 1).min(d[i][j - 1] + 1);
        }
    }
    d[a.len()][b.len()]
}

/// Curve point by repeated linear interpolation.
pub fn de_casteljau(points: &[(f64, f64)], s: f64) -> (f64, f64) {
    let mut pts = points.to_vec();
    while pts.len() > 1 {
        pts = pts
            .windows(2)
            .map(|w| (w[0].0 + s * (w[1].0 - w[0].0), w[0].1 + s * (w[1].1 - w[0].1)))
            .collect();
    }
    pts[0]
}

fn cross(o: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Monotone chain; counter-clockwise, no repeated endpoint.
pub fn convex_hull(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &(f64, f64)>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for &p in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

/// Distance from `p` to the hull polygon, zero inside.
pub fn distance_outside_hull(hull: &[(f64, f64)], p: (f64, f64)) -> f64 {
    match hull.len() {
        0 => f64::INFINITY,
        1 => ((p.0 - hull[0].0).powi(2) + (p.1 - hull[0].1).powi(2)).sqrt(),
        2 => point_segment_distance(p, hull[0], hull[1]),
        n => {
            let inside = (0..n).all(|i| cross(hull[i], hull[(i + 1) % n], p) >= 0.0);
            if inside {
                0.0
            } else {
                (0..n)
                    .map(|i| point_segment_distance(p, hull[i], hull[(i + 1) % n]))
                    .fold(f64::INFINITY, f64::min)
            }
        }
    }
}

pub fn point_segment_distance(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len_sq = dx * dx + dy * dy;
    let t = if len_sq == 0.0 {
        0.0
    } else {
        (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len_sq).clamp(0.0, 1.0)
    };
    let (qx, qy) = (a.0 + t * dx, a.1 + t * dy);
    ((p.0 - qx).powi(2) + (p.1 - qy).powi(2)).sqrt()
}

/// Every pixel whose center is within `radius` of the polyline, row-major.
pub fn brute_force_stroke(width: u32, height: u32, path: &[(f64, f64)], radius: f64) -> Vec<(u32, u32)> {
    let segments: Vec<((f64, f64), (f64, f64))> = if path.len() == 1 {
        vec![(path[0], path[0])]
    } else {
        path.windows(2).map(|w| (w[0], w[1])).collect()
    };
    let mut out = Vec::new();
    for y in 0..height {
        for x in 0..width {
            let p = (x as f64, y as f64);
            if segments.iter().any(|&(a, b)| point_segment_distance(p, a, b) <= radius) {
                out.push((x, y));
            }
        }
    }
    out
}

/// Best log score over every frame labelling that collapses to `target`.
///
/// Labels range over `symbols` (the distinct characters of the target, by
/// column) plus `blank`; paths are enumerated exhaustively.
pub fn best_ctc_path(
    log_probs: &[Vec<f64>],
    symbols: &[usize],
    blank: usize,
    target: &[usize],
) -> Option<f64> {
    let t = log_probs.len();
    let mut choices = symbols.to_vec();
    choices.push(blank);
    let k = choices.len();
    let mut best: Option<f64> = None;
    let mut digits = vec![0usize; t];
    loop {
        let labels: Vec<usize> = digits.iter().map(|&d| choices[d]).collect();
        if collapse(&labels, blank) == target {
            let score: f64 = labels.iter().enumerate().map(|(f, &l)| log_probs[f][l]).sum();
            best = Some(best.map_or(score, |b: f64| b.max(score)));
        }
        let mut i = 0;
        loop {
            if i == t {
                return best;
            }
            digits[i] += 1;
            if digits[i] < k {
                break;
            }
            digits[i] = 0;
            i += 1;
        }
    }
}

/// Merge repeats, then drop blanks.
pub fn collapse(labels: &[usize], blank: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut prev = None;
    for &l in labels {
        if Some(l) != prev && l != blank {
            out.push(l);
        }
        prev = Some(l);
    }
    out
}
