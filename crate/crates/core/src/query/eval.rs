use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use crate::ns::{is_privacy_term, rdf, xsd};
use crate::rdf::{Dataset, GraphId, Iri, Term, Value};
use crate::vocab::Vocabulary;

use super::ast::{CmpOp, Element, Expr, GroupPattern, Query, TermPattern, TriplePattern};
use super::ResultSet;

/// One solution: variable name to bound term.
pub type Solution = BTreeMap<String, Term>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Scope {
    /// The resource and observation graphs, merged.
    Data,
    Named(GraphId),
}

/// Evaluates the query over the data graphs. `rdf:type` patterns with a
/// constant class match instances of its subclasses too.
pub fn evaluate(q: &Query, d: &Dataset, v: &Vocabulary) -> ResultSet {
    Evaluator::new(d, v).evaluate(q)
}

pub(crate) struct Evaluator<'a> {
    dataset: &'a Dataset,
    vocab: &'a Vocabulary,
}

impl<'a> Evaluator<'a> {
    pub(crate) fn new(dataset: &'a Dataset, vocab: &'a Vocabulary) -> Self {
        Self { dataset, vocab }
    }

    pub(crate) fn evaluate(&self, q: &Query) -> ResultSet {
        let vars = q.projected_vars();
        ResultSet::from_solutions(vars, self.solutions(q), q.distinct)
    }

    /// Solutions over every WHERE variable, before projection.
    pub(crate) fn solutions(&self, q: &Query) -> Vec<Solution> {
        self.eval_group(&q.where_clause, Scope::Data, vec![Solution::new()])
    }

    fn eval_group(&self, g: &GroupPattern, scope: Scope, input: Vec<Solution>) -> Vec<Solution> {
        let mut sols = input;
        let triples: Vec<&TriplePattern> = g.triples().collect();
        for t in self.order(&triples, sols.first()) {
            sols = sols.iter().flat_map(|s| self.match_triple(t, scope, s)).collect();
            if sols.is_empty() {
                return sols;
            }
        }
        for e in &g.elements {
            match e {
                Element::Graph(name, inner) => {
                    let Some(graph) = GraphId::from_iri(name.as_str()) else {
                        return Vec::new();
                    };
                    sols = self.eval_group(inner, Scope::Named(graph), sols);
                }
                Element::SubSelect(sub) => {
                    let vars = sub.projected_vars();
                    let mut inner: Vec<Solution> = self
                        .solutions(sub)
                        .into_iter()
                        .map(|s| s.into_iter().filter(|(k, _)| vars.contains(k)).collect())
                        .collect();
                    if sub.distinct {
                        let set: BTreeSet<Solution> = inner.into_iter().collect();
                        inner = set.into_iter().collect();
                    }
                    sols = join(&sols, &inner);
                }
                _ => {}
            }
        }
        for e in &g.elements {
            if let Element::Optional(inner) = e {
                sols = sols
                    .into_iter()
                    .flat_map(|s| {
                        let ext = self.eval_group(inner, scope, vec![s.clone()]);
                        if ext.is_empty() { vec![s] } else { ext }
                    })
                    .collect();
            }
        }
        for f in g.filters() {
            sols.retain(|s| ebv(f, s) == Ok(true));
        }
        sols
    }

    /// Greedy join order: most constrained pattern first, ties in written order.
    fn order<'t>(&self, triples: &[&'t TriplePattern], seed: Option<&Solution>) -> Vec<&'t TriplePattern> {
        let mut bound: BTreeSet<String> = seed.map(|s| s.keys().cloned().collect()).unwrap_or_default();
        let mut left: Vec<&TriplePattern> = triples.to_vec();
        let mut out = Vec::new();
        while !left.is_empty() {
            let score = |t: &TriplePattern| {
                [&t.subject, &t.predicate, &t.object]
                    .iter()
                    .filter(|p| match p {
                        TermPattern::Term(_) => true,
                        TermPattern::Var(v) => bound.contains(v),
                    })
                    .count()
            };
            let (idx, _) = left
                .iter()
                .enumerate()
                .max_by(|(i, a), (j, b)| score(a).cmp(&score(b)).then(j.cmp(i)))
                .expect("non-empty");
            let t = left.remove(idx);
            for p in [&t.subject, &t.predicate, &t.object] {
                if let TermPattern::Var(v) = p {
                    bound.insert(v.clone());
                }
            }
            out.push(t);
        }
        out
    }

    fn match_triple(&self, t: &TriplePattern, scope: Scope, sol: &Solution) -> Vec<Solution> {
        let resolve = |p: &TermPattern| -> Option<Term> {
            match p {
                TermPattern::Term(t) => Some(t.clone()),
                TermPattern::Var(v) => sol.get(v).cloned(),
            }
        };
        let s = resolve(&t.subject);
        let p = resolve(&t.predicate);
        let o = resolve(&t.object);
        let p_iri = match &p {
            Some(Term::Iri(i)) => Some(i.clone()),
            Some(_) => return Vec::new(),
            None => None,
        };
        if matches!(s, Some(Term::Literal(_))) {
            return Vec::new();
        }

        let mut found: BTreeSet<(Term, Iri, Term)> = BTreeSet::new();
        match scope {
            Scope::Named(g) => {
                self.dataset
                    .match_in(g, s.as_ref(), p_iri.as_ref(), o.as_ref(), &mut |s, p, o| {
                        found.insert((s.clone(), p.clone(), o.clone()));
                    });
            }
            Scope::Data => {
                let ty = Iri::from_static(rdf::TYPE);
                // only a class written in the pattern is entailed, so results do
                // not depend on join order
                let entailed_class = match (&t.predicate, &t.object) {
                    (TermPattern::Term(Term::Iri(p)), TermPattern::Term(Term::Iri(c))) if *p == ty => Some(c.clone()),
                    _ => None,
                };
                for g in [GraphId::ResourceGraph, GraphId::ObservationGraph] {
                    if let Some(class) = &entailed_class {
                        let mut classes = self.vocab.subclasses(class);
                        classes.insert(class.clone());
                        for c in classes {
                            let c = Term::Iri(c);
                            self.dataset.match_in(g, s.as_ref(), Some(&ty), Some(&c), &mut |s, _, _| {
                                found.insert((s.clone(), ty.clone(), Term::Iri(class.clone())));
                            });
                        }
                        continue;
                    }
                    self.dataset
                        .match_in(g, s.as_ref(), p_iri.as_ref(), o.as_ref(), &mut |s, p, o| {
                            if is_privacy_term(p.as_str()) {
                                return;
                            }
                            if *p == ty && o.as_iri().is_some_and(|c| is_privacy_term(c.as_str())) {
                                return;
                            }
                            found.insert((s.clone(), p.clone(), o.clone()));
                        });
                }
            }
        }

        let mut out = Vec::new();
        'next: for (fs, fp, fo) in found {
            let mut ext = sol.clone();
            for (slot, value) in [(&t.subject, fs), (&t.predicate, Term::Iri(fp)), (&t.object, fo)] {
                if let TermPattern::Var(v) = slot {
                    match ext.get(v) {
                        Some(existing) if *existing != value => continue 'next,
                        Some(_) => {}
                        None => {
                            ext.insert(v.clone(), value);
                        }
                    }
                }
            }
            out.push(ext);
        }
        out
    }
}

fn join(left: &[Solution], right: &[Solution]) -> Vec<Solution> {
    let mut out = Vec::new();
    for l in left {
        for r in right {
            let compatible = r.iter().all(|(k, v)| l.get(k).is_none_or(|x| x == v));
            if compatible {
                let mut m = l.clone();
                m.extend(r.iter().map(|(k, v)| (k.clone(), v.clone())));
                out.push(m);
            }
        }
    }
    out
}

/// Filter outcome: `Err` is a type error, which drops the solution.
type Truth = Result<bool, ()>;

fn term_of(e: &Expr, s: &Solution) -> Result<Term, ()> {
    match e {
        Expr::Var(v) => s.get(v).cloned().ok_or(()),
        Expr::Const(t) => Ok(t.clone()),
        other => ebv(other, s).map(|b| {
            Term::Literal(
                crate::rdf::Literal::typed(b.to_string(), Iri::from_static(xsd::BOOLEAN)).expect("boolean literal"),
            )
        }),
    }
}

pub(crate) fn ebv(e: &Expr, s: &Solution) -> Truth {
    match e {
        Expr::Bound(v) => Ok(s.contains_key(v)),
        Expr::Not(inner) => ebv(inner, s).map(|b| !b),
        Expr::And(a, b) => match (ebv(a, s), ebv(b, s)) {
            (Ok(false), _) | (_, Ok(false)) => Ok(false),
            (Ok(true), Ok(true)) => Ok(true),
            _ => Err(()),
        },
        Expr::Or(a, b) => match (ebv(a, s), ebv(b, s)) {
            (Ok(true), _) | (_, Ok(true)) => Ok(true),
            (Ok(false), Ok(false)) => Ok(false),
            _ => Err(()),
        },
        Expr::Cmp(op, a, b) => compare(*op, &term_of(a, s)?, &term_of(b, s)?),
        Expr::Var(_) | Expr::Const(_) => {
            let Term::Literal(l) = term_of(e, s)? else { return Err(()) };
            match l.value() {
                Value::Boolean(b) => Ok(b),
                Value::Numeric(n) => Ok(n != 0.0 && !n.is_nan()),
                Value::String(s) => Ok(!s.is_empty()),
                _ => Err(()),
            }
        }
    }
}

/// Compares two terms the way FILTER does.
pub(crate) fn compare(op: CmpOp, a: &Term, b: &Term) -> Truth {
    let ordering = match (a, b) {
        (Term::Literal(x), Term::Literal(y)) => match x.value().partial_cmp_typed(&y.value()) {
            Some(o) => Some(o),
            None if matches!(op, CmpOp::Eq | CmpOp::Ne) && a == b => Some(Ordering::Equal),
            None => return Err(()),
        },
        _ => None,
    };
    match (op, ordering) {
        (CmpOp::Eq, None) => Ok(a == b),
        (CmpOp::Ne, None) => Ok(a != b),
        (_, None) => Err(()),
        (CmpOp::Lt, Some(o)) => Ok(o == Ordering::Less),
        (CmpOp::Le, Some(o)) => Ok(o != Ordering::Greater),
        (CmpOp::Gt, Some(o)) => Ok(o == Ordering::Greater),
        (CmpOp::Ge, Some(o)) => Ok(o != Ordering::Less),
        (CmpOp::Eq, Some(o)) => Ok(o == Ordering::Equal),
        (CmpOp::Ne, Some(o)) => Ok(o != Ordering::Equal),
    }
}
