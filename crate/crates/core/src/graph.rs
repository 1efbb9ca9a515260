use crate::error::{Error, Result};
use crate::oracle::OracleOptions;
use crate::pitch::PitchClass;
use crate::scheme::Scheme;
use num_bigint::BigUint;
use num_traits::Zero;
use std::collections::HashMap;
use std::io::Write;

/// The window-transfer graph of a scheme.
///
/// Nodes are the valid length-`w` canons starting with pitch 0, where `w`
/// is the span (or 1 for a single voice). Each valid length-`(w+1)` canon
/// starting with 0 contributes one edge from its first window to its
/// second window renormalized to start at 0, so walks of the graph decode
/// exactly to valid canons.
pub struct TransferGraph {
    scheme: Scheme,
    span: i64,
    window_len: usize,
    windows: Vec<Vec<PitchClass>>,
    successors: Vec<Vec<(u32, u32)>>,
    edge_count: u64,
    /// For each note distance `d` (1-based), the bitmask of allowed values
    /// of `(x_k - x_(k-d)) mod 7`.
    allowed: Vec<u8>,
}

/// Bitmask of allowed pitch differences per note distance, folded over all
/// ordered voice pairs at that distance.
fn allowed_masks(scheme: &Scheme) -> Vec<u8> {
    let span = scheme.span() as usize;
    let mut allowed = vec![0x7fu8; span + 1];
    let voices = scheme.voices();
    for (i, vi) in voices.iter().enumerate() {
        for (j, vj) in voices.iter().enumerate() {
            if i == j || vj.t <= vi.t {
                continue;
            }
            let d = (vj.t - vi.t) as usize;
            // diff = (x_k - x_(k-d)) + (p_i - p_j); forbid diff in {1,6},
            // 3 when j is the bass, 4 when i is the bass.
            let shift = (vi.p() - vj.p()).value() as i64;
            let mut forbidden = vec![1i64, 6];
            if vj.is_bass {
                forbidden.push(3);
            }
            if vi.is_bass {
                forbidden.push(4);
            }
            for f in forbidden {
                let delta = PitchClass::new(f - shift).value();
                allowed[d] &= !(1u8 << delta);
            }
        }
    }
    allowed
}

fn delta_ok(allowed: &[u8], window: &[PitchClass], x: PitchClass) -> bool {
    let k = window.len();
    let max_d = (allowed.len() - 1).min(k);
    for d in 1..=max_d {
        let delta = (x - window[k - d]).value();
        if allowed[d] & (1u8 << delta) == 0 {
            return false;
        }
    }
    true
}

impl TransferGraph {
    /// Enumerates the valid windows by prefix-pruned DFS and wires the
    /// edges. `opts.node_budget` bounds the visited prefixes.
    pub fn build(scheme: &Scheme, opts: OracleOptions) -> Result<TransferGraph> {
        let span = scheme.span();
        let window_len = (span.max(1)) as usize;
        let allowed = allowed_masks(scheme);

        // lexicographic DFS yields the nodes in lexicographic window order
        let mut windows = Vec::new();
        let mut stack = vec![vec![PitchClass::new(0)]];
        let mut visited = 0u64;
        while let Some(prefix) = stack.pop() {
            visited += 1;
            if visited > opts.node_budget {
                return Err(Error::BudgetExceeded(opts.node_budget));
            }
            if prefix.len() == window_len {
                windows.push(prefix);
                continue;
            }
            // push in reverse so smaller pitches pop first
            for x in PitchClass::all().rev() {
                if delta_ok(&allowed, &prefix, x) {
                    let mut next = prefix.clone();
                    next.push(x);
                    stack.push(next);
                }
            }
        }

        let index: HashMap<&[PitchClass], u32> = windows
            .iter()
            .enumerate()
            .map(|(i, w)| (w.as_slice(), i as u32))
            .collect();

        let mut successors = vec![Vec::new(); windows.len()];
        let mut edge_count = 0u64;
        for (id, window) in windows.iter().enumerate() {
            let succ: &mut Vec<(u32, u32)> = &mut successors[id];
            for x in PitchClass::all() {
                if !delta_ok(&allowed, window, x) {
                    continue;
                }
                // shift left and renormalize to start at 0; the result is a
                // suffix of a valid canon, hence itself a known node
                let base = if window_len > 1 {
                    window[1]
                } else {
                    x
                };
                let mut next: Vec<PitchClass> =
                    window.iter().skip(1).map(|&n| n - base).collect();
                next.push(x - base);
                let target = index[next.as_slice()];
                edge_count += 1;
                match succ.iter_mut().find(|(t, _)| *t == target) {
                    Some((_, mult)) => *mult += 1,
                    None => succ.push((target, 1)),
                }
            }
        }

        Ok(TransferGraph {
            scheme: scheme.clone(),
            span,
            window_len,
            windows,
            successors,
            edge_count,
            allowed,
        })
    }

    pub fn scheme(&self) -> &Scheme {
        &self.scheme
    }

    pub fn span(&self) -> i64 {
        self.span
    }

    pub fn window_len(&self) -> usize {
        self.window_len
    }

    pub fn node_count(&self) -> usize {
        self.windows.len()
    }

    pub fn edge_count(&self) -> u64 {
        self.edge_count
    }

    pub fn window(&self, id: u32) -> &[PitchClass] {
        &self.windows[id as usize]
    }

    pub fn successors(&self, id: u32) -> &[(u32, u32)] {
        &self.successors[id as usize]
    }

    /// Debug dump: a node table (`id window`) followed by an edge list
    /// (`src dst multiplicity`).
    pub fn dump(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "# nodes {}", self.windows.len())?;
        for (id, w) in self.windows.iter().enumerate() {
            let text: String = w.iter().map(|n| char::from(b'0' + n.value())).collect();
            writeln!(out, "{id} {text}")?;
        }
        writeln!(out, "# edges {}", self.edge_count)?;
        for (src, succ) in self.successors.iter().enumerate() {
            for &(dst, mult) in succ {
                writeln!(out, "{src} {dst} {mult}")?;
            }
        }
        Ok(())
    }

    /// Exact `V_n` via repeated integer matrix-vector products: for
    /// `n >= w`, `V_n = 7 * 1^T A^(n-w) 1`; shorter melodies are counted
    /// directly.
    pub fn count_valid_fast(&self, n: usize) -> BigUint {
        if n < self.window_len {
            return self.count_short(n);
        }
        let mut vec: Vec<BigUint> = vec![BigUint::from(1u32); self.windows.len()];
        for _ in 0..(n - self.window_len) {
            vec = self.apply(&vec);
        }
        let total: BigUint = vec.iter().sum();
        total * BigUint::from(7u32)
    }

    /// `V_n` for every `n <= n_max` in one sweep.
    pub fn count_series(&self, n_max: usize) -> CountSeries {
        let mut values = Vec::with_capacity(n_max + 1);
        for n in 0..self.window_len.min(n_max + 1) {
            values.push(self.count_short(n));
        }
        if n_max >= self.window_len {
            let mut vec: Vec<BigUint> = vec![BigUint::from(1u32); self.windows.len()];
            values.push(vec.iter().sum::<BigUint>() * BigUint::from(7u32));
            for _ in self.window_len..n_max {
                vec = self.apply(&vec);
                values.push(vec.iter().sum::<BigUint>() * BigUint::from(7u32));
            }
        }
        CountSeries { values }
    }

    fn apply(&self, vec: &[BigUint]) -> Vec<BigUint> {
        let mut out = vec![BigUint::zero(); vec.len()];
        for (src, succ) in self.successors.iter().enumerate() {
            for &(dst, mult) in succ {
                let term = &vec[dst as usize] * mult;
                out[src] += term;
            }
        }
        out
    }

    /// Hand-built graph for exercising shapes (edgeless, chains) that no
    /// scheme produces.
    #[cfg(test)]
    pub(crate) fn synthetic(node_count: usize, edges: &[(u32, u32, u32)]) -> TransferGraph {
        let mut successors = vec![Vec::new(); node_count];
        let mut edge_count = 0u64;
        for &(src, dst, mult) in edges {
            successors[src as usize].push((dst, mult));
            edge_count += mult as u64;
        }
        TransferGraph {
            scheme: "{(0,0)}".parse().unwrap(),
            span: 0,
            window_len: 1,
            windows: vec![vec![PitchClass::new(0)]; node_count],
            successors,
            edge_count,
            allowed: vec![0x7f],
        }
    }

    fn count_short(&self, n: usize) -> BigUint {
        if n == 0 {
            return BigUint::from(1u32);
        }
        // transposition symmetry: count canons starting at 0, times 7
        let mut total = 0u64;
        let mut stack = vec![vec![PitchClass::new(0)]];
        while let Some(prefix) = stack.pop() {
            if prefix.len() == n {
                total += 1;
                continue;
            }
            for x in PitchClass::all() {
                if delta_ok(&self.allowed, &prefix, x) {
                    let mut next = prefix.clone();
                    next.push(x);
                    stack.push(next);
                }
            }
        }
        BigUint::from(total) * BigUint::from(7u32)
    }
}

/// Exact counts `V_0..=V_nmax`.
#[derive(Clone, Debug)]
pub struct CountSeries {
    values: Vec<BigUint>,
}

impl CountSeries {
    pub fn get(&self, n: usize) -> Option<&BigUint> {
        self.values.get(n)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &BigUint)> {
        self.values.iter().enumerate()
    }
}

/// Strongly connected components in topological order of the condensation.
pub struct SccPartition {
    pub components: Vec<Vec<u32>>,
}

/// Iterative Tarjan over the transfer graph.
pub fn scc_decompose(g: &TransferGraph) -> SccPartition {
    let n = g.node_count();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<u32> = Vec::new();
    let mut components: Vec<Vec<u32>> = Vec::new();
    let mut counter = 0usize;

    // explicit DFS frames: (node, next successor position)
    let mut frames: Vec<(u32, usize)> = Vec::new();
    for root in 0..n as u32 {
        if index[root as usize] != usize::MAX {
            continue;
        }
        frames.push((root, 0));
        index[root as usize] = counter;
        low[root as usize] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root as usize] = true;

        while let Some(&mut (v, ref mut pos)) = frames.last_mut() {
            let succ = g.successors(v);
            if *pos < succ.len() {
                let (w, _) = succ[*pos];
                *pos += 1;
                if index[w as usize] == usize::MAX {
                    index[w as usize] = counter;
                    low[w as usize] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w as usize] = true;
                    frames.push((w, 0));
                } else if on_stack[w as usize] {
                    low[v as usize] = low[v as usize].min(index[w as usize]);
                }
            } else {
                frames.pop();
                if let Some(&mut (parent, _)) = frames.last_mut() {
                    low[parent as usize] = low[parent as usize].min(low[v as usize]);
                }
                if low[v as usize] == index[v as usize] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().unwrap();
                        on_stack[w as usize] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    components.push(comp);
                }
            }
        }
    }
    // Tarjan emits components in reverse topological order
    components.reverse();
    SccPartition { components }
}
