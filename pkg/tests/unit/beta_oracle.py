"""
Reference composition by beta reduction.

Lexical meanings and rule combinators are typed lambda terms in NLTK's logic
notation; noun phrases are generalized quantifiers. Evaluating a parse tree
applies each rule's combinator to its children's meanings and lets
``simplify`` perform the beta reductions of a Montague-style derivation. The
reduced term is read back as a list of atoms whose entities are constants
(str) or fresh OracleVar objects.
"""
import itertools

from nltk.sem.logic import (
    AbstractVariableExpression,
    AndExpression,
    ApplicationExpression,
    ConstantExpression,
    ExistsExpression,
    Expression,
    LambdaExpression,
)
from nltk.sem.logic import Variable as LogicVariable

lexpr = Expression.fromstring


class OracleVar:
    _ids = itertools.count(1)

    def __init__(self):
        self.id = next(self._ids)

    def __repr__(self):
        return f"?{self.id}"


def constant(name):
    return ConstantExpression(LogicVariable(name))


LEXICAL = {
    "noun": lexpr(r'\c x.object(c,x)'),
    "adj": lexpr(r'\c x.property(c,x)'),
    "intr": lexpr(r'\c v a.exists z.eventuality(c,v,a,z)'),
    "tr": lexpr(r'\c v a o.eventuality(c,v,a,o)'),
    "ditr": lexpr(r'\c v a o g.action(c,v,a,o,g)'),
}

QUANTIFY = lexpr(r'\N P.exists x.(N(x) & P(x))')

COMBINATORS = {
    "cnp_adj": lexpr(r'\A N x.(A(x) & N(x))'),
    "cnp_compound": lexpr(r'\L R x.exists y.(L(y) & R(x) & circumstance(by_with_for,x,y))'),
    "cnp_pp": lexpr(r'\N r Q x.(N(x) & Q(\y.relationship(r,x,y)))'),
    "np_name": lexpr(r'\n P.P(n)'),
    "np_poss": lexpr(r'\w N P.exists x.(N(x) & circumstance(of,x,w) & P(x))'),
    "vp_tr": lexpr(r'\V Q v a.Q(\o.V(v,a,o))'),
    "vp_ditr": lexpr(r'\V G O v a.G(\g.O(\o.V(v,a,o,g)))'),
    "vp_pp": lexpr(r'\M r Q v a.(M(v,a) & Q(\y.circumstance(r,v,y)))'),
    "vp_adv": lexpr(r'\m M v a.(M(v,a) & manner(m,v))'),
    "vp_adv_post": lexpr(r'\M m v a.(M(v,a) & manner(m,v))'),
    "s": lexpr(r'\Q M v.Q(\a.M(v,a))'),
    "s_pp": lexpr(r'\r Q S v.(S(v) & Q(\y.circumstance(r,v,y)))'),
}


def lexical_meaning(entry):
    c = constant(entry.constant)
    cat = entry.category
    if cat in ("name", "adv", "prep", "poss"):
        return c
    if cat == "det":
        return None
    key = entry.features.get("trans") if cat == "verb" else cat
    if key not in LEXICAL:
        raise ValueError(f"no oracle meaning for {cat}")
    return LEXICAL[key](c).simplify()


def apply_all(combinator, *args):
    return combinator(*args).simplify()


def rule_meaning(rule_id, kids):
    if rule_id in ("cnp_noun", "vp_intr"):
        return kids[0]
    if rule_id == "np_det":
        return apply_all(QUANTIFY, kids[1])
    if rule_id == "np_bare":
        return apply_all(QUANTIFY, kids[0])
    if rule_id == "pp":
        return (kids[0], kids[1])
    if rule_id == "cnp_pp":
        cnp, (relation, np) = kids
        return apply_all(COMBINATORS[rule_id], cnp, relation, np)
    if rule_id == "vp_pp":
        vp, (relation, np) = kids
        return apply_all(COMBINATORS[rule_id], vp, relation, np)
    if rule_id == "s_pp":
        (relation, np), s = kids
        return apply_all(COMBINATORS[rule_id], relation, np, s)
    if rule_id in COMBINATORS:
        return apply_all(COMBINATORS[rule_id], *kids)
    raise ValueError(f"no oracle meaning for rule {rule_id}")


def meaning(edge):
    if edge.is_lexical:
        return lexical_meaning(edge.entry)
    return rule_meaning(edge.rule.id, [meaning(c) for c in edge.children])


def _entity(expr, env):
    if isinstance(expr, ConstantExpression):
        return expr.variable.name
    if isinstance(expr, AbstractVariableExpression) and expr.variable in env:
        return env[expr.variable]
    raise ValueError(f"not a bound entity: {expr}")


def read_atoms(expr, env=None):
    """Atoms of a beta-normal conjunction; binders open onto fresh entities and
    applications of a bound property contribute nothing."""
    env = {} if env is None else env
    if isinstance(expr, (LambdaExpression, ExistsExpression)):
        return read_atoms(expr.term, {**env, expr.variable: OracleVar()})
    if isinstance(expr, AndExpression):
        return read_atoms(expr.first, env) + read_atoms(expr.second, env)
    if isinstance(expr, ApplicationExpression):
        head, args = expr.uncurry()
        if isinstance(head, ConstantExpression):
            return [(head.variable.name,) + tuple(_entity(a, env) for a in args)]
        if isinstance(head, AbstractVariableExpression):
            return []
    raise ValueError(f"cannot read atoms from {expr}")


def evaluate(edge):
    """Atoms of the analysis rooted at ``edge``."""
    if edge.category not in ("s", "np", "cnp", "vp"):
        raise ValueError(f"cannot evaluate category {edge.category}")
    return read_atoms(meaning(edge))


# -- comparison ---------------------------------------------------------------

def _normalize(term):
    from logdoc.terms import Constant, Skolem, Variable

    if isinstance(term, (Variable, OracleVar)):
        return ("v", term)
    if isinstance(term, Constant):
        return ("c", term.name)
    if isinstance(term, Skolem):
        return ("c", str(term))
    return ("c", term)


def as_tuples(atoms):
    """Logic-core atoms or oracle tuples as (predicate, normalized args...)."""
    out = []
    for a in atoms:
        if isinstance(a, tuple):
            out.append((a[0],) + tuple(_normalize(x) for x in a[1:]))
        else:
            out.append((a.predicate,) + tuple(_normalize(x) for x in a.args))
    return out


def alpha_equivalent(left, right):
    """Same atoms up to a consistent one-to-one renaming of variables, in any order."""
    left, right = as_tuples(left), as_tuples(right)
    if len(left) != len(right):
        return False

    def match(i, used, forward, backward):
        if i == len(left):
            return True
        a = left[i]
        for j, b in enumerate(right):
            if j in used or len(a) != len(b) or a[0] != b[0]:
                continue
            f, r = dict(forward), dict(backward)
            ok = True
            for x, y in zip(a[1:], b[1:]):
                if x[0] != y[0]:
                    ok = False
                elif x[0] == "c":
                    ok = x == y
                elif f.get(x, y) != y or r.get(y, x) != x:
                    ok = False
                else:
                    f[x], r[y] = y, x
                if not ok:
                    break
            if ok and match(i + 1, used | {j}, f, r):
                return True
        return False

    return match(0, frozenset(), {}, {})
