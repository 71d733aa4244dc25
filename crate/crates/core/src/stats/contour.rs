use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Smallest point count for which a density contour is attempted.
pub const MIN_CONTOUR_POINTS: usize = 10;

/// Half-height isolines of a smoothed 2-D histogram.
///
/// The data range is split into `grid_resolution` cells per axis, counts are
/// smoothed with a `smoothing_window` x `smoothing_window` mean filter, and
/// the level at half of the filtered maximum is traced with marching squares.
/// The grid carries an empty margin, so every polygon is closed.
pub fn density_contour<T: Scalar>(points: &[[T; 2]], grid_resolution: usize, smoothing_window: usize) -> Result<Vec<Vec<[T; 2]>>> {
    if points.len() < MIN_CONTOUR_POINTS {
        return Err(Error::InvalidParameter(format!("{} points; contours need at least {MIN_CONTOUR_POINTS}", points.len())));
    }
    if grid_resolution == 0 || smoothing_window == 0 {
        return Err(Error::EmptyGrid);
    }
    let margin = smoothing_window + 1;
    let size = grid_resolution + 2 * margin;
    let mut origin = [T::zero(); 2];
    let mut cell = [T::one(); 2];
    for axis in 0..2 {
        let lo = points.iter().map(|p| p[axis]).fold(T::infinity(), T::min);
        let hi = points.iter().map(|p| p[axis]).fold(T::neg_infinity(), T::max);
        if !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidParameter("non-finite point".into()));
        }
        let span = if hi > lo { hi - lo } else { T::one() };
        cell[axis] = span / T::from_len(grid_resolution);
        origin[axis] = lo - cell[axis] * T::from_len(margin);
    }

    let mut counts = vec![vec![T::zero(); size]; size];
    for p in points {
        let idx = |axis: usize| {
            let rel = ((p[axis] - origin[axis]) / cell[axis]).floor().to_usize().unwrap_or(0);
            rel.min(margin + grid_resolution - 1)
        };
        let (i, j) = (idx(0), idx(1));
        counts[i][j] = counts[i][j] + T::one();
    }

    let before = smoothing_window / 2;
    let after = smoothing_window - before;
    let area = T::from_len(smoothing_window * smoothing_window);
    let mut smooth = vec![vec![T::zero(); size]; size];
    #[allow(clippy::needless_range_loop)]
    for i in 0..size {
        for j in 0..size {
            let mut acc = T::zero();
            for a in i.saturating_sub(before)..(i + after).min(size) {
                for b in j.saturating_sub(before)..(j + after).min(size) {
                    acc = acc + counts[a][b];
                }
            }
            smooth[i][j] = acc / area;
        }
    }
    let max = smooth.iter().flatten().copied().fold(T::zero(), T::max);
    let level = max * T::lit(0.5);

    // Grid nodes sit at cell centres.
    let node =
        |i: usize, j: usize| [origin[0] + (T::from_len(i) + T::lit(0.5)) * cell[0], origin[1] + (T::from_len(j) + T::lit(0.5)) * cell[1]];
    Ok(march(&smooth, level)
        .into_iter()
        .map(|poly| {
            poly.into_iter()
                .map(|(a, b, t)| {
                    let pa = node(a.0, a.1);
                    let pb = node(b.0, b.1);
                    [pa[0] + (pb[0] - pa[0]) * t, pa[1] + (pb[1] - pa[1]) * t]
                })
                .collect()
        })
        .collect())
}

type Node = (usize, usize);
/// A crossing on the grid edge between two nodes, with the interpolation
/// fraction from the first node.
type Crossing<T> = (Node, Node, T);

/// Closed isolines of `v` at `level`, as sequences of edge crossings.
/// Nodes with value `>= level` are inside.
fn march<T: Scalar>(v: &[Vec<T>], level: T) -> Vec<Vec<Crossing<T>>> {
    let size = v.len();
    let inside = |n: Node| v[n.0][n.1] >= level;
    let crossing = |a: Node, b: Node| -> Crossing<T> {
        let (va, vb) = (v[a.0][a.1], v[b.0][b.1]);
        (a, b, (level - va) / (vb - va))
    };
    // Each segment joins two edges; an edge is identified by its node pair.
    let mut segments: Vec<[(Node, Node); 2]> = Vec::new();
    for i in 0..size - 1 {
        for j in 0..size - 1 {
            let c = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)];
            let ins = c.map(inside);
            let e = [(c[0], c[1]), (c[1], c[2]), (c[3], c[2]), (c[0], c[3])];
            let cut: Vec<usize> = (0..4).filter(|&k| ins[k] != ins[(k + 1) % 4]).collect();
            match cut.len() {
                2 => segments.push([e[cut[0]], e[cut[1]]]),
                4 => {
                    let centre = c.iter().map(|&n| v[n.0][n.1]).sum::<T>() / T::lit(4.0);
                    // Keep the diagonal pair that shares the centre's side connected.
                    let cut_corners = if (centre >= level) == ins[0] { [1, 3] } else { [0, 2] };
                    for k in cut_corners {
                        segments.push([e[(k + 3) % 4], e[k]]);
                    }
                }
                _ => {}
            }
        }
    }

    let mut by_edge: HashMap<(Node, Node), Vec<usize>> = HashMap::new();
    for (s, seg) in segments.iter().enumerate() {
        for edge in seg {
            by_edge.entry(*edge).or_default().push(s);
        }
    }
    let mut used = vec![false; segments.len()];
    let mut polygons = Vec::new();
    for start in 0..segments.len() {
        if used[start] {
            continue;
        }
        used[start] = true;
        let first = segments[start][0];
        let mut edges = vec![first];
        let mut current = segments[start][1];
        while current != first {
            edges.push(current);
            let next = by_edge[&current].iter().copied().find(|&s| !used[s]);
            let Some(s) = next else { break };
            used[s] = true;
            current = if segments[s][0] == current { segments[s][1] } else { segments[s][0] };
        }
        polygons.push(edges.into_iter().map(|(a, b)| crossing(a, b)).collect());
    }
    polygons
}

/// Absolute area of a simple polygon (shoelace formula).
pub fn polygon_area<T: Scalar>(poly: &[[T; 2]]) -> T {
    let n = poly.len();
    let twice = (0..n)
        .map(|i| {
            let (p, q) = (poly[i], poly[(i + 1) % n]);
            p[0] * q[1] - q[0] * p[1]
        })
        .sum::<T>();
    (twice * T::lit(0.5)).abs()
}

/// Even-odd point-in-polygon test.
pub fn point_in_polygon<T: Scalar>(p: [T; 2], poly: &[[T; 2]]) -> bool {
    let n = poly.len();
    let mut inside = false;
    let mut j = n.wrapping_sub(1);
    for i in 0..n {
        let (a, b) = (poly[i], poly[j]);
        if (a[1] > p[1]) != (b[1] > p[1]) && p[0] < (b[0] - a[0]) * (p[1] - a[1]) / (b[1] - a[1]) + a[0] {
            inside = !inside;
        }
        j = i;
    }
    inside
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn gaussian(seed: u64, n: usize, centre: [f64; 2], sigma: f64) -> Vec<[f64; 2]> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = Normal::new(0.0, sigma).unwrap();
        (0..n).map(|_| [centre[0] + d.sample(&mut rng), centre[1] + d.sample(&mut rng)]).collect()
    }

    #[test]
    fn single_cluster_gives_one_polygon_around_the_median() {
        let pts = gaussian(1, 2000, [1.0, 2.0], 0.5);
        let polys = density_contour(&pts, 40, 5).unwrap();
        assert_eq!(polys.len(), 1);
        assert!(point_in_polygon([1.0, 2.0], &polys[0]));
    }

    #[test]
    fn separated_clusters_give_two_polygons() {
        let mut pts = gaussian(2, 1000, [0.0, 0.0], 0.3);
        pts.extend(gaussian(3, 1000, [5.0, 5.0], 0.3));
        let polys = density_contour(&pts, 60, 3).unwrap();
        assert_eq!(polys.len(), 2);
        let hits = |c: [f64; 2]| polys.iter().filter(|p| point_in_polygon(c, p)).count();
        assert_eq!(hits([0.0, 0.0]), 1);
        assert_eq!(hits([5.0, 5.0]), 1);
    }

    #[test]
    fn narrower_cluster_has_smaller_contour() {
        // Fixed outliers pin both grids to the same extent.
        let frame = [[-4.0, -4.0], [4.0, 4.0]];
        let mut wide = gaussian(4, 3000, [0.0, 0.0], 0.6);
        let mut narrow = gaussian(4, 3000, [0.0, 0.0], 0.3);
        wide.extend(frame);
        narrow.extend(frame);
        let a = polygon_area(&density_contour(&wide, 80, 3).unwrap()[0]);
        let b = polygon_area(&density_contour(&narrow, 80, 3).unwrap()[0]);
        assert!(b < a, "{b} >= {a}");
    }

    #[test]
    fn guards() {
        assert!(density_contour(&[[0.0f64, 0.0]; 5], 10, 3).is_err());
        assert!(matches!(density_contour(&[[0.0f64, 0.0]; 20], 0, 3), Err(Error::EmptyGrid)));
        // Identical points still produce a closed contour.
        assert_eq!(density_contour(&[[1.0f64, 1.0]; 20], 10, 3).unwrap().len(), 1);
    }

    #[test]
    fn area_and_containment_helpers() {
        let square = [[0.0, 0.0], [2.0, 0.0], [2.0, 2.0], [0.0, 2.0]];
        assert_eq!(polygon_area(&square), 4.0);
        assert!(point_in_polygon([1.0, 1.0], &square));
        assert!(!point_in_polygon([3.0, 1.0], &square));
    }
}
