//! Index helpers for the photon-number-difference decomposition of two modes
//! sharing one cutoff.
//!
//! Sector `d = n₁ − n₂` holds the states `|s + i, s + i − d⟩` for
//! `i < cutoff − |d|`, with `s = max(0, d)`.

pub(crate) fn sector_start(d: i32) -> usize {
    d.max(0) as usize
}

pub(crate) fn sector_len(cutoff: usize, d: i32) -> usize {
    cutoff - d.unsigned_abs() as usize
}

pub(crate) fn second(n1: usize, d: i32) -> usize {
    (n1 as i32 - d) as usize
}

#[derive(Debug, Clone)]
pub(crate) struct Sectors {
    next: i32,
    last: i32,
}

impl Sectors {
    pub(crate) fn new(cutoff: usize) -> Self {
        let c = cutoff as i32;
        Self {
            next: 1 - c,
            last: c - 1,
        }
    }
}

impl Iterator for Sectors {
    type Item = i32;

    fn next(&mut self) -> Option<i32> {
        if self.next > self.last {
            return None;
        }
        self.next += 1;
        Some(self.next - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sectors_cover_the_basis() {
        let c = 5;
        let mut seen = vec![false; c * c];
        for d in Sectors::new(c) {
            for i in 0..sector_len(c, d) {
                let n1 = sector_start(d) + i;
                let n2 = second(n1, d);
                assert!(n1 < c && n2 < c);
                assert!(!seen[n1 * c + n2]);
                seen[n1 * c + n2] = true;
            }
        }
        assert!(seen.into_iter().all(|s| s));
        assert_eq!(Sectors::new(c).count(), 2 * c - 1);
    }
}
