use super::BrepModel;

pub(crate) struct DisjointSets {
    parent: Vec<usize>,
}

impl DisjointSets {
    pub fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // smaller root wins so group order is stable
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }

    /// Groups in order of their smallest member, members ascending.
    pub fn groups(&mut self) -> Vec<Vec<usize>> {
        let n = self.parent.len();
        let mut slot = vec![usize::MAX; n];
        let mut out: Vec<Vec<usize>> = Vec::new();
        for x in 0..n {
            let r = self.find(x);
            if slot[r] == usize::MAX {
                slot[r] = out.len();
                out.push(Vec::new());
            }
            out[slot[r]].push(x);
        }
        out
    }
}

/// Faces grouped into shells by shared edges.
pub(crate) fn face_shells(m: &BrepModel) -> Vec<Vec<usize>> {
    let mut ds = DisjointSets::new(m.faces.len());
    for e in &m.edges {
        let faces: Vec<usize> = e
            .halfedges
            .iter()
            .filter_map(|&h| m.halfedges.get(h))
            .filter_map(|he| m.loops.get(he.loop_id))
            .map(|l| l.face)
            .filter(|&f| f < m.faces.len())
            .collect();
        if let [a, b] = faces[..] {
            ds.union(a, b);
        }
    }
    ds.groups()
}

/// Partition of vertex ids under the undirected vertex-edge graph.
pub fn connected_components(m: &BrepModel) -> Vec<Vec<usize>> {
    let mut ds = DisjointSets::new(m.vertices.len());
    for e in &m.edges {
        let [a, b] = e.vertices;
        if a < m.vertices.len() && b < m.vertices.len() {
            ds.union(a, b);
        }
    }
    ds.groups()
}

/// `(intra-component vertex pairs, all vertex pairs)`.
pub fn pair_counts(m: &BrepModel) -> (usize, usize) {
    let pairs = |n: usize| n * n.saturating_sub(1) / 2;
    let intra = connected_components(m).iter().map(|c| pairs(c.len())).sum();
    (intra, pairs(m.vertices.len()))
}
