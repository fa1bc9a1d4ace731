//! Programs using cut, checked against the plain reference interpreter.

pub struct CutCase {
    pub name: &'static str,
    pub program: &'static str,
    pub query: &'static str,
    /// Uses tabled predicates; compare answer sets instead of sequences.
    pub tabled: bool,
}

macro_rules! case {
    ($name:expr, $prog:expr, $q:expr) => {
        CutCase { name: $name, program: $prog, query: $q, tabled: false }
    };
    ($name:expr, $prog:expr, $q:expr, tabled) => {
        CutCase { name: $name, program: $prog, query: $q, tabled: true }
    };
}

pub fn corpus() -> Vec<CutCase> {
    vec![
        case!(
            "max",
            "max(X,Y,X) :- >=(X,Y), !.\nmax(X,Y,Y).\nn(1). n(3). n(2).\n",
            "n(A), n(B), max(A,B,M)"
        ),
        case!("first", "first(X) :- n(X), !.\nn(4). n(2). n(7).\n", "first(X)"),
        case!(
            "classify",
            "classify(X, neg) :- <(X,0), !.\nclassify(0, zero) :- !.\nclassify(X, pos).\nv(-2). v(0). v(5).\n",
            "v(X), classify(X,C)"
        ),
        case!(
            "memberchk",
            "mchk(X, '.'(X,T)) :- !.\nmchk(X, '.'(H,T)) :- mchk(X,T).\n",
            "mchk(X, '.'(a, '.'(b, '.'(c, []))))"
        ),
        case!(
            "delete_first",
            "del(X, '.'(X,T), T) :- !.\ndel(X, '.'(H,T), '.'(H,R)) :- del(X,T,R).\n",
            "del(b, '.'(a, '.'(b, '.'(c, '.'(b, [])))), L)"
        ),
        case!(
            "negation",
            "not_p(X) :- p(X), !, fail.\nnot_p(X).\np(2). p(4).\nn(1). n(2). n(3). n(4). n(5).\n",
            "n(X), not_p(X)"
        ),
        case!(
            "fib",
            "fib(0,0) :- !.\nfib(1,1) :- !.\nfib(N,F) :- is(A, -(N,1)), is(B, -(N,2)), fib(A,FA), fib(B,FB), is(F, +(FA,FB)).\n",
            "fib(15,F)"
        ),
        case!("fact", "fact(0,1) :- !.\nfact(N,F) :- is(M, -(N,1)), fact(M,G), is(F, *(N,G)).\n", "fact(10,F)"),
        case!(
            "local_cut",
            "a(X,Y) :- b(X), c(X,Y).\nb(1). b(2). b(3).\nc(X,Y) :- d(Y), >(Y,X), !.\nd(1). d(2). d(3). d(4).\n",
            "a(X,Y)"
        ),
        case!("pair", "pair(X,Y) :- n(X), n(Y), >(Y,X), !.\nn(3). n(1). n(2).\n", "pair(X,Y)"),
        case!(
            "parity",
            "g(X,Y) :- n(X), h(X,Y).\nh(X,even) :- =:=(mod(X,2),0), !.\nh(X,odd).\nn(1). n(2). n(3). n(4).\n",
            "g(X,Y)"
        ),
        case!(
            "gcd",
            "gcd(X,0,X) :- !.\ngcd(X,Y,G) :- is(R, mod(X,Y)), gcd(Y,R,G).\n",
            "gcd(1071,462,G)"
        ),
        case!(
            "range",
            "range(H,H,'.'(H,[])) :- !.\nrange(L,H,'.'(L,T)) :- <(L,H), is(M, +(L,1)), range(M,H,T).\n",
            "range(3,7,L)"
        ),
        case!(
            "caller_alternatives",
            "t(X) :- s(X).\nt(100).\ns(X) :- n(X), =(X,2), !.\ns(99).\nn(1). n(2). n(3).\n",
            "t(X)"
        ),
        case!("double_cut", "q(X,Y) :- n(X), !, n(Y), >(Y,1), !.\nn(1). n(2). n(3).\n", "q(X,Y)"),
        case!("query_cut", "n(1). n(2). n(3).\n", "n(X), !, n(Y)"),
        case!(
            "insertion_sort",
            "isort([], []).\nisort('.'(H,T), S) :- isort(T, S1), ins(H, S1, S).\n\
             ins(X, [], '.'(X, [])).\nins(X, '.'(H,T), '.'(X, '.'(H,T))) :- =<(X,H), !.\nins(X, '.'(H,T), '.'(H,R)) :- ins(X,T,R).\n",
            "isort('.'(3, '.'(1, '.'(4, '.'(1, '.'(5, '.'(9, '.'(2, []))))))), S)"
        ),
        case!(
            "tabled_reach_then_cut",
            ":- table r/2.\nr(X,Y) :- e(X,Y).\nr(X,Y) :- e(X,Z), r(Z,Y).\n\
             e(1,2). e(2,3). e(1,3). e(3,4). e(2,5).\n\
             big(Y, yes) :- >(Y,3), !.\nbig(Y, no).\n",
            "r(1,Y), big(Y,B)",
            tabled
        ),
        case!(
            "tabled_squares_with_limit",
            ":- table sq/2.\nsq(X,Y) :- n(X), is(Y, *(X,X)).\n\
             lim(Y, L) :- >(Y, 5), !, =(L, high).\nlim(Y, low).\nn(1). n(2). n(3). n(4).\n",
            "sq(X,Y), lim(Y,L)",
            tabled
        ),
        case!(
            "tabled_inside_cut_helper",
            ":- table anc/2.\nanc(X,Y) :- par(X,Y).\nanc(X,Y) :- par(X,Z), anc(Z,Y).\n\
             par(a,b). par(b,c). par(c,d). par(a,e).\n\
             root_of(X) :- person(X), has_desc(X).\nhas_desc(X) :- par(X,Y), !.\n\
             person(a). person(b). person(d). person(e).\n",
            "root_of(X), anc(X,Y)",
            tabled
        ),
    ]
}

/// A cut that would remove a generator still producing answers.
pub const CUT_OVER_GENERATOR: &str = ":- table t/1.\nt(1). t(2). t(3).\nq(X) :- t(X), !.\n";
pub const CUT_OVER_GENERATOR_QUERY: &str = "q(X)";
