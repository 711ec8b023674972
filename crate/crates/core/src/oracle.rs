//! Slow reference computations used by the self-test.

use std::collections::HashSet;

use crate::fixed::Fixed;
use crate::semigroup::Element;

/// Every point of `Box(n)` reachable as a nonnegative integer combination of
/// `generators`, by enumerating coefficient vectors.
pub fn span_in_box(generators: &[Element], n: u32) -> HashSet<Vec<u32>> {
    let dim = generators.first().map(|g| g.dim()).unwrap_or(0);
    let mut out = HashSet::new();
    let mut acc = vec![0u32; dim];
    fn go(gens: &[Element], n: u32, acc: &mut Vec<u32>, out: &mut HashSet<Vec<u32>>) {
        let Some((g, rest)) = gens.split_first() else {
            out.insert(acc.clone());
            return;
        };
        let saved = acc.clone();
        loop {
            go(rest, n, acc, out);
            let mut fits = true;
            for (a, c) in acc.iter_mut().zip(g.coords()) {
                *a += c;
                fits &= *a <= n;
            }
            if !fits {
                break;
            }
        }
        *acc = saved;
    }
    go(generators, n, &mut acc, &mut out);
    out
}

/// Whether some `k in 0..=steps` has `arc(2^k (x - y)) >= 1/4`, read off the
/// binary digits of `z = x - y`: the arc distance of `2^k z` is at least
/// `1/4` exactly when digits `k` and `k + 1` differ.
pub fn doubling_separates(x: &Fixed, y: &Fixed, steps: u32) -> bool {
    let z = x.wrapping_sub(y);
    (0..=steps).any(|k| z.bit(k) != z.bit(k + 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn span_of_three_and_five() {
        let gens = [Element::new(&[3]).unwrap(), Element::new(&[5]).unwrap()];
        let mut got: Vec<u32> = span_in_box(&gens, 12).into_iter().map(|v| v[0]).collect();
        got.sort();
        assert_eq!(got, vec![0, 3, 5, 6, 8, 9, 10, 11, 12]);
    }

    #[test]
    fn doubling_digit_rule() {
        let f = |s: &str| crate::fixed::parse_fraction(s, 64).unwrap();
        // z = 1/8 = 0.001: digits 1 and 2 differ
        assert!(doubling_separates(&f("1/8"), &f("0"), 1));
        assert!(!doubling_separates(&f("1/8"), &f("0"), 0));
        assert!(!doubling_separates(&f("0.5"), &f("0.5"), 10));
    }
}
