//! Reference implementations used to cross-check the library. Each one is
//! written from the definitions directly and shares no code with the
//! implementation it checks, apart from canonical string rendering.

#![allow(dead_code)]

use std::collections::{BTreeMap, VecDeque};

use ladder_forge::graph::{
    canonical_edge_string, canonical_node_string, Edge, EdgeType, ElementType, LdGraph, Node,
};
use ladder_forge::retrieval::tokenize;

/// Full-matrix edit distance.
pub fn lev_oracle(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut d = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for (i, row) in d.iter_mut().enumerate() {
        row[0] = i;
    }
    for j in 0..=b.len() {
        d[0][j] = j;
    }
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let sub = d[i - 1][j - 1] + usize::from(a[i - 1] != b[j - 1]);
            d[i][j] = sub.min(d[i - 1][j] + 1).min(d[i][j - 1] + 1);
        }
    }
    d[a.len()][b.len()]
}

fn clen(s: &str) -> u64 {
    s.chars().count() as u64
}

/// Cheapest way to pair up two edge lists, trying every partial injection.
fn edge_list_cost(xs: &[String], ys: &[String]) -> u64 {
    fn go(xs: &[String], ys: &[String], used: &mut Vec<bool>) -> u64 {
        let Some((head, rest)) = xs.split_first() else {
            return ys
                .iter()
                .zip(used.iter())
                .filter(|(_, &u)| !u)
                .map(|(y, _)| clen(y))
                .sum();
        };
        let mut best = clen(head) + go(rest, ys, used);
        for j in 0..ys.len() {
            if !used[j] {
                used[j] = true;
                best = best.min(lev_oracle(head, &ys[j]) as u64 + go(rest, ys, used));
                used[j] = false;
            }
        }
        best
    }
    go(xs, ys, &mut vec![false; ys.len()])
}

/// Graph edit distance by enumerating every node mapping (each node of `a`
/// goes to a distinct node of `b` or is deleted) and pricing the implied
/// edit path.
pub fn ged_oracle(a: &LdGraph, b: &LdGraph) -> u64 {
    let na = a.node_count();
    let nb = b.node_count();
    let sa: Vec<String> = a.nodes().iter().map(canonical_node_string).collect();
    let sb: Vec<String> = b.nodes().iter().map(canonical_node_string).collect();
    let estr = |g: &LdGraph, e: &Edge| {
        canonical_edge_string(e, g.node(e.src).unwrap(), g.node(e.dst).unwrap())
    };

    let price = |map: &[Option<usize>]| -> u64 {
        let mut cost = 0;
        let mut hit = vec![false; nb];
        for (u, t) in map.iter().enumerate() {
            match t {
                Some(v) => {
                    hit[*v] = true;
                    cost += lev_oracle(&sa[u], &sb[*v]) as u64;
                }
                None => cost += clen(&sa[u]),
            }
        }
        cost += (0..nb).filter(|&v| !hit[v]).map(|v| clen(&sb[v])).sum::<u64>();

        let mut a_groups: BTreeMap<(usize, usize), Vec<String>> = BTreeMap::new();
        for e in a.edges() {
            match (map[e.src], map[e.dst]) {
                (Some(s), Some(d)) => a_groups.entry((s, d)).or_default().push(estr(a, e)),
                _ => cost += clen(&estr(a, e)),
            }
        }
        let mut b_groups: BTreeMap<(usize, usize), Vec<String>> = BTreeMap::new();
        for e in b.edges() {
            b_groups.entry((e.src, e.dst)).or_default().push(estr(b, e));
        }
        for (key, ys) in &b_groups {
            let xs = a_groups.remove(key).unwrap_or_default();
            cost += edge_list_cost(&xs, ys);
        }
        for xs in a_groups.values() {
            cost += xs.iter().map(|x| clen(x)).sum::<u64>();
        }
        cost
    };

    fn enumerate(
        u: usize,
        na: usize,
        nb: usize,
        map: &mut Vec<Option<usize>>,
        used: &mut Vec<bool>,
        price: &dyn Fn(&[Option<usize>]) -> u64,
        best: &mut u64,
    ) {
        if u == na {
            *best = (*best).min(price(map));
            return;
        }
        map.push(None);
        enumerate(u + 1, na, nb, map, used, price, best);
        map.pop();
        for v in 0..nb {
            if !used[v] {
                used[v] = true;
                map.push(Some(v));
                enumerate(u + 1, na, nb, map, used, price, best);
                map.pop();
                used[v] = false;
            }
        }
    }

    let mut best = u64::MAX;
    enumerate(0, na, nb, &mut Vec::new(), &mut vec![false; nb], &price, &mut best);
    best
}

/// Okapi BM25 evaluated term by term from raw token lists.
pub fn bm25_oracle(docs: &[(&str, &str)], query: &str, k1: f64, b: f64) -> Vec<(String, f64)> {
    let toks: Vec<Vec<String>> = docs.iter().map(|(_, t)| tokenize(t)).collect();
    let n = docs.len() as f64;
    let avg = toks.iter().map(Vec::len).sum::<usize>() as f64 / n;
    let q = tokenize(query);
    docs.iter()
        .enumerate()
        .map(|(i, (id, _))| {
            let len = toks[i].len() as f64;
            let mut s = 0.0;
            for t in &q {
                let tf = toks[i].iter().filter(|x| *x == t).count() as f64;
                if tf == 0.0 {
                    continue;
                }
                let df = toks.iter().filter(|d| d.contains(t)).count() as f64;
                let idf = ((n - df + 0.5) / (df + 0.5) + 1.0).ln();
                s += idf * tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * len / avg));
            }
            (id.to_string(), s)
        })
        .collect()
}

/// Ranking of oracle scores by (score desc, id asc).
pub fn oracle_ranking(mut scores: Vec<(String, f64)>) -> Vec<String> {
    scores.sort_by(|x, y| y.1.partial_cmp(&x.1).unwrap().then(x.0.cmp(&y.0)));
    scores.into_iter().map(|(id, _)| id).collect()
}

/// Decode XML by drawing every rung on a pixel raster and flood-filling
/// the conductive pixels.
///
/// Cell `(r, c)` has its left connection point at pixel `(3c, 3r)`. A
/// horizontal line paints the row between its end points, a vertical line
/// also paints the column from its left point down to the left point of
/// the cell below. An element's input is its left point and its output the
/// left point of the next column. Returns node and edge canonical strings,
/// both sorted.
pub fn xml_raster_oracle(text: &str) -> (Vec<String>, Vec<String>) {
    let doc = roxmltree::Document::parse(text).expect("well-formed XML");
    let mut node_strings = Vec::new();
    let mut edge_strings = Vec::new();
    for rung in doc.root_element().children().filter(|n| n.has_tag_name("Rung")) {
        struct Part {
            kind: String,
            row: usize,
            col: usize,
            len: usize,
            node: Option<Node>,
        }
        let mut parts = Vec::new();
        for el in rung.children().filter(|n| n.has_tag_name("Element")) {
            let kind = el.attribute("ElementType").unwrap().to_string();
            let row: usize = el.attribute("Row").unwrap().parse().unwrap();
            let col: usize = el.attribute("Col").unwrap().parse().unwrap();
            let len = el.attribute("Length").map_or(1, |l| l.parse().unwrap());
            let node = if matches!(kind.as_str(), "HorzLine" | "VertLine" | "MultiHorzLine") {
                None
            } else {
                let ty: ElementType = kind.parse().unwrap();
                let params: Vec<(String, String)> = el
                    .attributes()
                    .filter_map(|a| {
                        a.name()
                            .strip_prefix("Param.")
                            .map(|k| (k.to_string(), a.value().to_string()))
                    })
                    .collect();
                let name = el.attribute("Name").unwrap_or("");
                Some(Node::new(0, ty, name).with_params(params).unwrap())
            };
            parts.push(Part {
                kind,
                row,
                col,
                len,
                node,
            });
        }
        let width = parts.iter().map(|p| p.col + p.len).max().unwrap_or(0) + 1;
        let height = parts.iter().map(|p| p.row).max().unwrap_or(0) + 2;
        let (w, h) = (3 * width + 1, 3 * height + 1);
        let mut on = vec![vec![false; w]; h];
        for p in &parts {
            let (x0, y) = (3 * p.col, 3 * p.row);
            match p.kind.as_str() {
                "HorzLine" | "MultiHorzLine" => {
                    for x in x0..=x0 + 3 * p.len {
                        on[y][x] = true;
                    }
                }
                "VertLine" => {
                    for x in x0..=x0 + 3 {
                        on[y][x] = true;
                    }
                    for yy in y..=y + 3 {
                        on[yy][x0] = true;
                    }
                }
                _ => {
                    on[y][x0] = true;
                    on[y][x0 + 3] = true;
                }
            }
        }
        let mut label = vec![vec![usize::MAX; w]; h];
        let mut next = 0;
        for sy in 0..h {
            for sx in 0..w {
                if !on[sy][sx] || label[sy][sx] != usize::MAX {
                    continue;
                }
                let mut queue = VecDeque::from([(sx, sy)]);
                label[sy][sx] = next;
                while let Some((x, y)) = queue.pop_front() {
                    let around = [
                        (x.wrapping_sub(1), y),
                        (x + 1, y),
                        (x, y.wrapping_sub(1)),
                        (x, y + 1),
                    ];
                    for (nx, ny) in around {
                        if nx < w && ny < h && on[ny][nx] && label[ny][nx] == usize::MAX {
                            label[ny][nx] = next;
                            queue.push_back((nx, ny));
                        }
                    }
                }
                next += 1;
            }
        }
        let elems: Vec<&Part> = parts.iter().filter(|p| p.node.is_some()).collect();
        for p in &elems {
            node_strings.push(canonical_node_string(p.node.as_ref().unwrap()));
        }
        let flow: Vec<&&Part> = elems
            .iter()
            .filter(|p| p.node.as_ref().unwrap().element_type != ElementType::Variable)
            .collect();
        for d in &flow {
            for r in &flow {
                let out_net = label[3 * d.row][3 * (d.col + 1)];
                let in_net = label[3 * r.row][3 * r.col];
                if out_net == in_net {
                    let (dn, rn) = (d.node.as_ref().unwrap(), r.node.as_ref().unwrap());
                    let e = Edge::new(0, 0, EdgeType::for_flow(dn.element_type, rn.element_type));
                    edge_strings.push(canonical_edge_string(&e, dn, rn));
                }
            }
        }
        for fb in &elems {
            let fbn = fb.node.as_ref().unwrap();
            if fbn.element_type != ElementType::FunctionBlock {
                continue;
            }
            let mut below: Vec<&Part> = parts
                .iter()
                .filter(|p| p.row > fb.row && p.col <= fb.col && fb.col < p.col + p.len)
                .collect();
            below.sort_by_key(|p| p.row);
            for p in below {
                match &p.node {
                    Some(v) if v.element_type == ElementType::Variable => {
                        let k = (p.row - fb.row) as u32;
                        let e = Edge::new(0, 0, EdgeType::Input(k));
                        edge_strings.push(canonical_edge_string(&e, fbn, v));
                    }
                    _ => break,
                }
            }
        }
    }
    node_strings.sort();
    edge_strings.sort();
    (node_strings, edge_strings)
}

pub fn sorted_strings(g: &LdGraph) -> (Vec<String>, Vec<String>) {
    let mut n = g.canonical_node_strings();
    let mut e = g.canonical_edge_strings();
    n.sort();
    e.sort();
    (n, e)
}

/// Every node that can be reached from `start`, by name.
pub fn reachable_names(g: &LdGraph, start: usize) -> Vec<String> {
    let mut seen = vec![false; g.node_count()];
    let mut stack = vec![start];
    let mut out = Vec::new();
    while let Some(u) = stack.pop() {
        for e in g.out_edges(u) {
            if !seen[e.dst] {
                seen[e.dst] = true;
                out.push(g.node(e.dst).unwrap().name.clone());
                stack.push(e.dst);
            }
        }
    }
    out.sort();
    out
}

/// A random small graph with at most `max_nodes` nodes and forward edges
/// only, built from `seed` with a tiny linear congruential generator.
pub fn tiny_graph(seed: u64, max_nodes: usize) -> LdGraph {
    let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    let mut next = |m: u64| {
        state = state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        (state >> 33) % m
    };
    let types = [
        ElementType::NormallyOpen,
        ElementType::NormallyClosed,
        ElementType::StandardCoil,
        ElementType::FunctionBlock,
    ];
    let names = ["A", "B", "X1", "Y0"];
    let n = next(max_nodes as u64 + 1) as usize;
    let nodes: Vec<Node> = (0..n)
        .map(|i| Node::new(i, types[next(4) as usize], names[next(4) as usize]))
        .collect();
    let mut edges = Vec::new();
    for s in 0..n {
        for d in s + 1..n {
            if next(3) == 0 {
                let t = EdgeType::for_flow(nodes[s].element_type, nodes[d].element_type);
                edges.push(Edge::new(s, d, t));
            }
        }
    }
    LdGraph::from_parts(nodes, edges)
}

/// Whether every survivor of an edit still reaches every survivor it
/// reached before. Survivors are matched by name, so names must be unique
/// in `before`. For a duplication (more nodes after than before) the
/// original edge multiset must be kept, which implies the same.
pub fn survivors_keep_reachability(before: &LdGraph, after: &LdGraph) -> bool {
    if after.node_count() > before.node_count() {
        let mut kept = after.canonical_edge_strings();
        for e in before.canonical_edge_strings() {
            match kept.iter().position(|k| *k == e) {
                Some(i) => {
                    kept.swap_remove(i);
                }
                None => return false,
            }
        }
        return true;
    }
    let id_after: BTreeMap<&str, usize> = after
        .nodes()
        .iter()
        .map(|n| (n.name.as_str(), n.id))
        .collect();
    for n in before.nodes() {
        let Some(&u) = id_after.get(n.name.as_str()) else {
            continue;
        };
        let now = reachable_names(after, u);
        for name in reachable_names(before, n.id) {
            if id_after.contains_key(name.as_str()) && now.binary_search(&name).is_err() {
                return false;
            }
        }
    }
    true
}
