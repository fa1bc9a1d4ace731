use std::fmt::Write;
use std::str::FromStr;

/// A generated benchmark: program text plus the query to run on it.
#[derive(Clone, Debug)]
pub struct Generated {
    pub program: String,
    pub query: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Bench {
    Lgrid,
    Lgrid2,
    Rgrid2,
    Samegen,
    Queens,
    PathFig1,
}

impl FromStr for Bench {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "lgrid" => Bench::Lgrid,
            "lgrid2" | "lgrid/2" => Bench::Lgrid2,
            "rgrid2" | "rgrid/2" => Bench::Rgrid2,
            "samegen" => Bench::Samegen,
            "queens" => Bench::Queens,
            "path_fig1" => Bench::PathFig1,
            _ => return Err(format!("unknown generator {s:?}")),
        })
    }
}

impl Bench {
    pub fn generate(self, size: usize, seed: u64) -> Generated {
        match self {
            Bench::Lgrid => lgrid(size),
            Bench::Lgrid2 => lgrid2(size),
            Bench::Rgrid2 => rgrid2(size),
            Bench::Samegen => samegen(size, seed),
            Bench::Queens => queens(size),
            Bench::PathFig1 => path_fig1(),
        }
    }
}

/// Grid nodes are numbered row by row from 1; yields each edge to the right
/// and downward neighbour once.
fn grid_edges(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |r| {
        (0..n).flat_map(move |c| {
            let id = r * n + c + 1;
            let right = (c + 1 < n).then_some((id, id + 1));
            let down = (r + 1 < n).then_some((id, id + n));
            right.into_iter().chain(down)
        })
    })
}

/// Left recursion over a grid whose links are stored in both directions.
pub fn lgrid(n: usize) -> Generated {
    let mut p = String::from(":- table path/2.\npath(X,Z) :- path(X,Y), arc(Y,Z).\npath(X,Z) :- arc(X,Z).\n");
    for (a, b) in grid_edges(n) {
        writeln!(p, "arc({a},{b}). arc({b},{a}).").unwrap();
    }
    Generated { program: p, query: "path(X,Y)".into() }
}

const LINK: &str = "link(X,Y) :- e(X,Y).\nlink(X,Y) :- e(Y,X).\n";

fn edges_once(p: &mut String, n: usize) {
    for (a, b) in grid_edges(n) {
        writeln!(p, "e({a},{b}).").unwrap();
    }
}

/// Left recursion where a link is derived from either direction of a stored
/// edge.
pub fn lgrid2(n: usize) -> Generated {
    let mut p = String::from(":- table path/2.\npath(X,Z) :- path(X,Y), link(Y,Z).\npath(X,Z) :- link(X,Z).\n");
    p.push_str(LINK);
    edges_once(&mut p, n);
    Generated { program: p, query: "path(X,Y)".into() }
}

/// Right recursion over the same two-relation grid.
pub fn rgrid2(n: usize) -> Generated {
    let mut p = String::from(":- table path/2.\npath(X,Z) :- link(X,Y), path(Y,Z).\npath(X,Z) :- link(X,Z).\n");
    p.push_str(LINK);
    edges_once(&mut p, n);
    Generated { program: p, query: "path(X,Y)".into() }
}

/// 64-bit LCG (Knuth's MMIX constants), used so generated data does not
/// depend on any RNG crate version.
pub struct Lcg(u64);

impl Lcg {
    pub fn new(seed: u64) -> Lcg {
        Lcg(seed ^ 0x9E37_79B9_7F4A_7C15)
    }

    pub fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        self.0 >> 33
    }

    pub fn below(&mut self, n: u64) -> u64 {
        self.next() % n
    }
}

/// Same generation over a cylinder: `n` layers of `n` nodes, every node
/// linked to two random nodes of the next layer.
pub fn samegen(n: usize, seed: u64) -> Generated {
    let mut rng = Lcg::new(seed);
    let mut p = String::from(
        ":- table sg/2.\nsg(X,X) :- node(X).\nsg(X,Y) :- cyl(X,X1), sg(X1,Y1), cyl(Y,Y1).\n",
    );
    for id in 1..=n * n {
        writeln!(p, "node({id}).").unwrap();
    }
    for layer in 0..n.saturating_sub(1) {
        for i in 0..n {
            let from = layer * n + i + 1;
            let mut picked = Vec::with_capacity(2);
            while picked.len() < 2.min(n) {
                let to = (layer + 1) * n + rng.below(n as u64) as usize + 1;
                if !picked.contains(&to) {
                    picked.push(to);
                }
            }
            for to in picked {
                writeln!(p, "cyl({from},{to}).").unwrap();
            }
        }
    }
    Generated { program: p, query: "sg(1,Y)".into() }
}

/// Builds `'.'(a, '.'(b, ... []))`.
pub fn list<I: IntoIterator<Item = String>>(items: I) -> String
where
    I::IntoIter: DoubleEndedIterator,
{
    items.into_iter().rev().fold("[]".to_string(), |acc, x| format!("'.'({x}, {acc})"))
}

/// Places queens column by column, checking each new queen only against
/// those already placed.
pub fn queens(n: usize) -> Generated {
    let cols = list((1..=n).map(|i| i.to_string()));
    let p = format!(
        "queens(Qs) :- place({cols}, [], Qs).
place([], Qs, Qs).
place(Unplaced, Safe, Qs) :- sel(Q, Unplaced, R), safe(Q, Safe, 1), place(R, '.'(Q, Safe), Qs).
safe(Q, [], D).
safe(Q, '.'(Y, Ys), D) :- =\\=(Q, +(Y, D)), =\\=(Q, -(Y, D)), is(D1, +(D, 1)), safe(Q, Ys, D1).
sel(X, '.'(X, T), T).
sel(X, '.'(H, T), '.'(H, R)) :- sel(X, T, R).
"
    );
    Generated { program: p, query: "queens(Qs)".into() }
}

/// The two-arc-cycle example, plus arcs out of `d` so that `arc(a,Z)` keeps
/// open alternatives when clause indexing is off.
pub fn path_fig1() -> Generated {
    Generated {
        program: ":- table path/2.
path(X,Z) :- path(X,Y), path(Y,Z).
path(X,Z) :- arc(X,Z).
arc(a,b). arc(b,c). arc(c,b).
arc(d,a). arc(d,b). arc(d,c).
"
        .into(),
        query: "path(a,X)".into(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_edge_count() {
        assert_eq!(grid_edges(25).count(), 2 * 25 * 24);
        assert_eq!(grid_edges(1).count(), 0);
    }

    #[test]
    fn lcg_is_deterministic() {
        let a: Vec<u64> = { let mut r = Lcg::new(7); (0..5).map(|_| r.next()).collect() };
        let b: Vec<u64> = { let mut r = Lcg::new(7); (0..5).map(|_| r.next()).collect() };
        assert_eq!(a, b);
        assert_ne!(a, { let mut r = Lcg::new(8); (0..5).map(|_| r.next()).collect::<Vec<_>>() });
    }

    #[test]
    fn list_syntax() {
        assert_eq!(list(["1".to_string(), "2".to_string()]), "'.'(1, '.'(2, []))");
    }
}
