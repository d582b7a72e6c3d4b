//! Per-edge outputs: orientations, red/blue colorings, palette colorings and
//! forest decompositions, with their JSON forms keyed by edge id.

use std::collections::HashMap;

use serde::de::DeserializeOwned;
use serde::ser::SerializeMap;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::graph::{EdgeId, Graph, NodeId};

/// Serializes a slice as a JSON object keyed by index, in index order.
struct ByEdge<'a, T>(&'a [T]);

impl<T: Serialize> Serialize for ByEdge<'_, T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for (e, v) in self.0.iter().enumerate() {
            map.serialize_entry(&e.to_string(), v)?;
        }
        map.end()
    }
}

fn by_edge_from_map<T: Clone>(m: usize, raw: HashMap<String, T>) -> Result<Vec<T>> {
    let mut out: Vec<Option<T>> = vec![None; m];
    for (k, v) in raw {
        let e: EdgeId = k
            .parse()
            .map_err(|_| Error::MalformedArtifact(format!("key {k:?} is not an edge id")))?;
        if e >= m {
            return Err(Error::MalformedArtifact(format!("edge {e} is not in the graph")));
        }
        out[e] = Some(v);
    }
    out.into_iter()
        .enumerate()
        .map(|(e, v)| v.ok_or(Error::IncompleteArtifact { edge: e }))
        .collect()
}

fn parse_map<T: DeserializeOwned>(s: &str) -> Result<HashMap<String, T>> {
    Ok(serde_json::from_str(s)?)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Orientation {
    tail: Vec<NodeId>,
}

impl Orientation {
    pub fn from_tails(tail: Vec<NodeId>) -> Orientation {
        Orientation { tail }
    }

    /// Every full edge from its lower to its higher endpoint; half-edges
    /// point out of their endpoint.
    pub fn lower_to_higher(g: &Graph) -> Orientation {
        let tail = g.edges().map(|(_, a, b)| b.map_or(a, |b| a.min(b))).collect();
        Orientation { tail }
    }

    pub fn len(&self) -> usize {
        self.tail.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tail.is_empty()
    }

    #[inline]
    pub fn tail(&self, e: EdgeId) -> NodeId {
        self.tail[e]
    }

    #[inline]
    pub fn head(&self, g: &Graph, e: EdgeId) -> Option<NodeId> {
        g.other(e, self.tail[e])
    }

    pub fn tails(&self) -> &[NodeId] {
        &self.tail
    }

    #[inline]
    pub fn set_tail(&mut self, e: EdgeId, v: NodeId) {
        self.tail[e] = v;
    }

    /// Reverses a full edge; half-edges are left alone.
    pub fn flip(&mut self, g: &Graph, e: EdgeId) {
        if let Some(h) = g.other(e, self.tail[e]) {
            self.tail[e] = h;
        }
    }

    pub fn reversed(&self, g: &Graph) -> Orientation {
        let mut r = self.clone();
        for e in 0..g.m() {
            r.flip(g, e);
        }
        r
    }

    /// Out-degrees; a half-edge counts as outgoing for its endpoint.
    pub fn out_degrees(&self, g: &Graph) -> Vec<usize> {
        let mut out = vec![0usize; g.n()];
        for &t in &self.tail {
            out[t] += 1;
        }
        debug_assert_eq!(self.tail.len(), g.m());
        out
    }

    pub fn in_degrees(&self, g: &Graph) -> Vec<usize> {
        let mut inn = vec![0usize; g.n()];
        for e in 0..g.m() {
            if let Some(h) = self.head(g, e) {
                inn[h] += 1;
            }
        }
        inn
    }

    pub fn max_out_degree(&self, g: &Graph) -> usize {
        self.out_degrees(g).into_iter().max().unwrap_or(0)
    }

    /// Checks coverage and that every tail is an endpoint of its edge.
    pub fn validate(&self, g: &Graph) -> Result<()> {
        if self.tail.len() != g.m() {
            return Err(Error::IncompleteArtifact { edge: self.tail.len().min(g.m()) });
        }
        for (e, &t) in self.tail.iter().enumerate() {
            let (a, b) = g.endpoints(e);
            if t != a && Some(t) != b {
                return Err(Error::MalformedArtifact(format!("edge {e} has tail {t}, not an endpoint")));
            }
        }
        Ok(())
    }

    pub fn to_json_string(&self, g: &Graph) -> String {
        let pairs: Vec<(NodeId, Option<NodeId>)> =
            (0..self.tail.len()).map(|e| (self.tail[e], self.head(g, e))).collect();
        serde_json::to_string(&ByEdge(&pairs)).expect("serialization cannot fail")
    }

    pub fn from_json_str(g: &Graph, s: &str) -> Result<Orientation> {
        let raw: HashMap<String, (NodeId, Option<NodeId>)> = parse_map(s)?;
        let pairs = by_edge_from_map(g.m(), raw)?;
        let mut tail = Vec::with_capacity(pairs.len());
        for (e, (from, to)) in pairs.into_iter().enumerate() {
            let (a, b) = g.endpoints(e);
            let ok = match b {
                None => from == a && to.is_none(),
                Some(b) => (from, to) == (a, Some(b)) || (from, to) == (b, Some(a)),
            };
            if !ok {
                return Err(Error::MalformedArtifact(format!("edge {e} does not join {from} and {to:?}")));
            }
            tail.push(from);
        }
        Ok(Orientation { tail })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Color {
    #[serde(rename = "R")]
    Red,
    #[serde(rename = "B")]
    Blue,
}

impl Color {
    #[inline]
    pub fn opposite(self) -> Color {
        match self {
            Color::Red => Color::Blue,
            Color::Blue => Color::Red,
        }
    }

    #[inline]
    pub fn index(self) -> usize {
        match self {
            Color::Red => 0,
            Color::Blue => 1,
        }
    }
}

/// Red/blue edge coloring with per-node color degrees kept in sync.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwoColoring {
    colors: Vec<Color>,
    count: Vec<[u32; 2]>,
}

impl TwoColoring {
    pub fn new(g: &Graph, colors: Vec<Color>) -> Result<TwoColoring> {
        if colors.len() != g.m() {
            return Err(Error::IncompleteArtifact { edge: colors.len().min(g.m()) });
        }
        let mut count = vec![[0u32; 2]; g.n()];
        for (e, a, b) in g.edges() {
            let c = colors[e].index();
            count[a][c] += 1;
            if let Some(b) = b {
                count[b][c] += 1;
            }
        }
        Ok(TwoColoring { colors, count })
    }

    pub fn uniform(g: &Graph, c: Color) -> TwoColoring {
        Self::new(g, vec![c; g.m()]).expect("length matches")
    }

    pub fn len(&self) -> usize {
        self.colors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.colors.is_empty()
    }

    #[inline]
    pub fn color(&self, e: EdgeId) -> Color {
        self.colors[e]
    }

    pub fn colors(&self) -> &[Color] {
        &self.colors
    }

    #[inline]
    pub fn count(&self, v: NodeId, c: Color) -> usize {
        self.count[v][c.index()] as usize
    }

    pub fn set(&mut self, g: &Graph, e: EdgeId, c: Color) {
        let old = self.colors[e];
        if old == c {
            return;
        }
        self.colors[e] = c;
        let (a, b) = g.endpoints(e);
        for v in std::iter::once(a).chain(b) {
            self.count[v][old.index()] -= 1;
            self.count[v][c.index()] += 1;
        }
    }

    pub fn flip(&mut self, g: &Graph, e: EdgeId) {
        let c = self.colors[e].opposite();
        self.set(g, e, c);
    }

    /// Largest number of same-colored edges at any node.
    pub fn max_color_degree(&self) -> usize {
        self.count.iter().map(|c| c[0].max(c[1]) as usize).max().unwrap_or(0)
    }

    pub fn is_balanced(&self, t: usize) -> bool {
        self.max_color_degree() <= t
    }

    /// Recounts color degrees from scratch and compares with the kept ones.
    pub fn counts_consistent(&self, g: &Graph) -> bool {
        TwoColoring::new(g, self.colors.clone()).is_ok_and(|fresh| fresh.count == self.count)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&ByEdge(&self.colors)).expect("serialization cannot fail")
    }

    pub fn from_json_str(g: &Graph, s: &str) -> Result<TwoColoring> {
        let raw: HashMap<String, Color> = parse_map(s)?;
        TwoColoring::new(g, by_edge_from_map(g.m(), raw)?)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PaletteColoring {
    pub palette_size: usize,
    pub colors: Vec<u32>,
}

#[derive(Serialize)]
struct PaletteOut<'a> {
    palette_size: usize,
    colors: ByEdge<'a, u32>,
}

#[derive(Deserialize)]
struct PaletteIn {
    palette_size: usize,
    colors: HashMap<String, u32>,
}

impl PaletteColoring {
    /// Number of distinct colors actually present.
    pub fn used_colors(&self) -> usize {
        let mut seen = vec![false; self.palette_size.max(1)];
        let mut k = 0;
        for &c in &self.colors {
            let c = c as usize;
            if c < seen.len() && !seen[c] {
                seen[c] = true;
                k += 1;
            }
        }
        k
    }

    pub fn to_json_string(&self) -> String {
        let out = PaletteOut { palette_size: self.palette_size, colors: ByEdge(&self.colors) };
        serde_json::to_string(&out).expect("serialization cannot fail")
    }

    pub fn from_json_str(g: &Graph, s: &str) -> Result<PaletteColoring> {
        let raw: PaletteIn = serde_json::from_str(s)?;
        Ok(PaletteColoring {
            palette_size: raw.palette_size,
            colors: by_edge_from_map(g.m(), raw.colors)?,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ForestDecomposition {
    pub forests: usize,
    pub assignment: Vec<u32>,
    /// Forests claimed to be star forests.
    pub star_flags: Vec<bool>,
}

#[derive(Serialize)]
struct ForestOut<'a> {
    forests: usize,
    assignment: ByEdge<'a, u32>,
    star_flags: &'a [bool],
}

#[derive(Deserialize)]
struct ForestIn {
    forests: usize,
    assignment: HashMap<String, u32>,
    star_flags: Vec<bool>,
}

impl ForestDecomposition {
    pub fn to_json_string(&self) -> String {
        let out = ForestOut {
            forests: self.forests,
            assignment: ByEdge(&self.assignment),
            star_flags: &self.star_flags,
        };
        serde_json::to_string(&out).expect("serialization cannot fail")
    }

    pub fn from_json_str(g: &Graph, s: &str) -> Result<ForestDecomposition> {
        let raw: ForestIn = serde_json::from_str(s)?;
        if raw.star_flags.len() != raw.forests {
            return Err(Error::MalformedArtifact("star_flags length differs from forests".into()));
        }
        Ok(ForestDecomposition {
            forests: raw.forests,
            assignment: by_edge_from_map(g.m(), raw.assignment)?,
            star_flags: raw.star_flags,
        })
    }
}
