//! Slow reference computations of the token-list edit cost, kept separate
//! from the dynamic program so tests can check one against the other.
//!
//! Costs are passed in as closures over positions: `sub(i, j)` is the cost of
//! replacing `a[i]` by `b[j]` (`None` when not allowed), `del(i)` and
//! `ins(j)` the cost of deleting `a[i]` and inserting `b[j]`.

use std::collections::HashMap;

/// Minimum over every alignment of the two lists, found by depth-first
/// enumeration of edit scripts. A partial script is abandoned only once it
/// already costs at least as much as the best complete one.
pub fn exhaustive_cost(
    n: usize,
    m: usize,
    sub: &dyn Fn(usize, usize) -> Option<u32>,
    del: &dyn Fn(usize) -> u32,
    ins: &dyn Fn(usize) -> u32,
) -> u32 {
    struct Search<'a> {
        n: usize,
        m: usize,
        sub: &'a dyn Fn(usize, usize) -> Option<u32>,
        del: &'a dyn Fn(usize) -> u32,
        ins: &'a dyn Fn(usize) -> u32,
        best: u32,
    }
    impl Search<'_> {
        fn go(&mut self, i: usize, j: usize, spent: u32) {
            if spent >= self.best {
                return;
            }
            if i == self.n && j == self.m {
                self.best = spent;
                return;
            }
            if i < self.n && j < self.m {
                if let Some(c) = (self.sub)(i, j) {
                    self.go(i + 1, j + 1, spent + c);
                }
            }
            if i < self.n {
                self.go(i + 1, j, spent + (self.del)(i));
            }
            if j < self.m {
                self.go(i, j + 1, spent + (self.ins)(j));
            }
        }
    }
    let mut s = Search { n, m, sub, del, ins, best: u32::MAX };
    s.go(0, 0, 0);
    s.best
}

/// The edit recurrence evaluated top-down with memoization: the cost of
/// turning `a[i..]` into `b[j..]` is the cheapest of deleting `a[i]`,
/// inserting `b[j]`, or replacing one by the other.
pub fn recursive_cost(
    n: usize,
    m: usize,
    sub: &dyn Fn(usize, usize) -> Option<u32>,
    del: &dyn Fn(usize) -> u32,
    ins: &dyn Fn(usize) -> u32,
) -> u32 {
    struct Rec<'a> {
        n: usize,
        m: usize,
        sub: &'a dyn Fn(usize, usize) -> Option<u32>,
        del: &'a dyn Fn(usize) -> u32,
        ins: &'a dyn Fn(usize) -> u32,
        memo: HashMap<(usize, usize), u32>,
    }
    impl Rec<'_> {
        fn go(&mut self, i: usize, j: usize) -> u32 {
            if let Some(&c) = self.memo.get(&(i, j)) {
                return c;
            }
            let c = match (i < self.n, j < self.m) {
                (false, false) => 0,
                (true, false) => (self.del)(i) + self.go(i + 1, j),
                (false, true) => (self.ins)(j) + self.go(i, j + 1),
                (true, true) => {
                    let d = (self.del)(i) + self.go(i + 1, j);
                    let a = (self.ins)(j) + self.go(i, j + 1);
                    let r = (self.sub)(i, j).map(|c| c + self.go(i + 1, j + 1));
                    d.min(a).min(r.unwrap_or(u32::MAX))
                }
            };
            self.memo.insert((i, j), c);
            c
        }
    }
    Rec { n, m, sub, del, ins, memo: HashMap::new() }.go(0, 0)
}
