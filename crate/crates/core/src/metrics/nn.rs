/// Exact nearest-neighbour queries over a uniform grid of buckets.
///
/// Rings of buckets around the query are scanned outward until the best
/// distance found is below the distance to any unscanned bucket. Ties go
/// to the lowest point index, as in a linear scan.
#[derive(Debug, Clone)]
pub struct NearestIndex<'a> {
    points: &'a [[f64; 3]],
    lo: [f64; 3],
    cell: f64,
    dims: [usize; 3],
    /// Bucket `b` holds `order[start[b]..start[b + 1]]`.
    start: Vec<usize>,
    order: Vec<usize>,
}

impl<'a> NearestIndex<'a> {
    pub fn new(points: &'a [[f64; 3]]) -> Self {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for p in points {
            for d in 0..3 {
                lo[d] = lo[d].min(p[d]);
                hi[d] = hi[d].max(p[d]);
            }
        }
        if points.is_empty() {
            lo = [0.0; 3];
            hi = [0.0; 3];
        }
        let extent = (0..3).map(|d| hi[d] - lo[d]).fold(0.0, f64::max);
        let per_axis = (points.len() as f64 / 2.0).cbrt().ceil().max(1.0);
        let cell = if extent > 0.0 { extent / per_axis } else { 1.0 };
        let dims = [0, 1, 2].map(|d| (((hi[d] - lo[d]) / cell).floor() as usize + 1).min(1 << 10));
        let mut index = Self {
            points,
            lo,
            cell,
            dims,
            start: Vec::new(),
            order: Vec::new(),
        };
        let buckets = dims[0] * dims[1] * dims[2];
        let ids: Vec<usize> = points.iter().map(|&p| index.bucket(index.cell_of(p))).collect();
        let mut count = vec![0usize; buckets + 1];
        for &b in &ids {
            count[b + 1] += 1;
        }
        for b in 0..buckets {
            count[b + 1] += count[b];
        }
        let mut fill = count.clone();
        let mut order = vec![0; points.len()];
        for (i, &b) in ids.iter().enumerate() {
            order[fill[b]] = i;
            fill[b] += 1;
        }
        index.start = count;
        index.order = order;
        index
    }

    fn cell_of(&self, p: [f64; 3]) -> [usize; 3] {
        [0, 1, 2].map(|d| {
            let c = ((p[d] - self.lo[d]) / self.cell).floor();
            if c <= 0.0 {
                0
            } else {
                (c as usize).min(self.dims[d] - 1)
            }
        })
    }

    fn bucket(&self, c: [usize; 3]) -> usize {
        (c[0] * self.dims[1] + c[1]) * self.dims[2] + c[2]
    }

    /// `(squared distance, index)` of the nearest point. Panics on an
    /// empty index.
    pub fn nearest(&self, p: [f64; 3]) -> (f64, usize) {
        assert!(!self.points.is_empty(), "nearest on an empty point set");
        let c = self.cell_of(p);
        let mut best = (f64::INFINITY, usize::MAX);
        let consider = |i: usize, best: &mut (f64, usize)| {
            let q = self.points[i];
            let d2 = (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) + (p[2] - q[2]).powi(2);
            if d2 < best.0 || (d2 == best.0 && i < best.1) {
                *best = (d2, i);
            }
        };
        let max_r = self.dims.iter().copied().max().unwrap_or(1);
        for r in 0..=max_r {
            let range = |d: usize| (c[d].saturating_sub(r), (c[d] + r).min(self.dims[d] - 1));
            let (x0, x1) = range(0);
            let (y0, y1) = range(1);
            let (z0, z1) = range(2);
            for x in x0..=x1 {
                for y in y0..=y1 {
                    let shell = x.abs_diff(c[0]) == r || y.abs_diff(c[1]) == r;
                    let (zlo, zhi) = (c[2].checked_sub(r), Some(c[2] + r).filter(|&z| z < self.dims[2]));
                    let ends = [zlo, zhi.filter(|_| r > 0)];
                    let zs = (z0..=z1).filter(|&z| shell || ends.contains(&Some(z)));
                    for z in zs {
                        let b = self.bucket([x, y, z]);
                        for &i in &self.order[self.start[b]..self.start[b + 1]] {
                            consider(i, &mut best);
                        }
                    }
                }
            }
            // distance from p to the nearest unscanned bucket
            let mut bound = f64::INFINITY;
            for d in 0..3 {
                if c[d] > r {
                    bound = bound.min(p[d] - (self.lo[d] + (c[d] - r) as f64 * self.cell));
                }
                if c[d] + r + 1 < self.dims[d] {
                    bound = bound.min(self.lo[d] + (c[d] + r + 1) as f64 * self.cell - p[d]);
                }
            }
            if bound == f64::INFINITY {
                break;
            }
            // shave off rounding in the bucket assignment
            let bound = (bound * (1.0 - 1e-9) - 1e-12 * self.cell).max(0.0);
            if best.0 < bound * bound {
                break;
            }
        }
        best
    }
}

#[cfg(test)]
/// Linear scan with the same tie rule as [`NearestIndex::nearest`].
pub(crate) fn nearest_brute(points: &[[f64; 3]], p: [f64; 3]) -> (f64, usize) {
    let mut best = (f64::INFINITY, usize::MAX);
    for (i, q) in points.iter().enumerate() {
        let d2 = (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) + (p[2] - q[2]).powi(2);
        if d2 < best.0 {
            best = (d2, i);
        }
    }
    best
}
