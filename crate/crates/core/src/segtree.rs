//! Point-update / global-minimum tree over `(value, index)` pairs.

/// Minimum is taken lexicographically over `(value, index)`, so ties resolve
/// to the lowest index. Internal nodes hold only the winning leaf index.
#[derive(Debug, Clone)]
pub struct MinTree {
    size: usize,
    values: Vec<f64>,
    tree: Vec<u32>,
}

impl MinTree {
    pub fn new(values: &[f64]) -> Self {
        let size = values.len().next_power_of_two().max(1);
        let mut padded = Vec::with_capacity(size);
        padded.extend_from_slice(values);
        padded.resize(size, f64::INFINITY);
        let mut tree = vec![0u32; 2 * size];
        for (i, t) in tree[size..].iter_mut().enumerate() {
            *t = i as u32;
        }
        let mut t = MinTree {
            size,
            values: padded,
            tree,
        };
        for i in (1..size).rev() {
            t.tree[i] = t.better(t.tree[2 * i], t.tree[2 * i + 1]);
        }
        t
    }

    #[inline]
    fn better(&self, a: u32, b: u32) -> u32 {
        let (va, vb) = (self.values[a as usize], self.values[b as usize]);
        if va < vb || (va == vb && a <= b) {
            a
        } else {
            b
        }
    }

    pub fn update(&mut self, idx: usize, value: f64) {
        self.values[idx] = value;
        let mut i = (idx + self.size) / 2;
        while i >= 1 {
            let m = self.better(self.tree[2 * i], self.tree[2 * i + 1]);
            // an unchanged winner other than the updated leaf fixes all ancestors
            if self.tree[i] == m && m as usize != idx {
                break;
            }
            self.tree[i] = m;
            i /= 2;
        }
    }

    /// `(value, index)` of the minimum, or `None` if every value is infinite.
    pub fn min(&self) -> Option<(f64, usize)> {
        let m = self.tree[1] as usize;
        (self.values[m] < f64::INFINITY).then_some((self.values[m], m))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use rand::Rng;

    #[test]
    fn matches_linear_scan() {
        let mut rng = rng_from_seed(1);
        let mut vals: Vec<f64> = (0..37).map(|_| rng.random_range(0..5) as f64).collect();
        let mut t = MinTree::new(&vals);
        for _ in 0..500 {
            let i = rng.random_range(0..vals.len());
            let v = if rng.random::<f64>() < 0.1 { f64::INFINITY } else { rng.random_range(0..5) as f64 };
            vals[i] = v;
            t.update(i, v);
            let expect = vals
                .iter()
                .enumerate()
                .filter(|(_, v)| v.is_finite())
                .fold(None, |acc: Option<(f64, usize)>, (i, &v)| match acc {
                    Some((b, _)) if b <= v => acc,
                    _ => Some((v, i)),
                });
            assert_eq!(t.min(), expect);
        }
    }

    #[test]
    fn empty_and_all_infinite() {
        assert_eq!(MinTree::new(&[]).min(), None);
        assert_eq!(MinTree::new(&[f64::INFINITY; 3]).min(), None);
    }
}
