"""Logical terms, atoms and chain rules, plus path abstraction and the
rule text grammar.

Rules are immutable values. Fresh body variables are renumbered by first
occurrence at construction time, so structural equality is plain equality.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .kgstore import Interner, ParseError

# reserved head-variable indices
X = 0
Y = 1
_FIRST_FRESH = 2


class StraightnessError(ValueError):
    """A path or instantiation that repeats a term more than twice."""


class KindError(ValueError):
    """An operation applied to a rule of the wrong kind."""


@dataclass(frozen=True)
class Term:
    """A variable (index) or a constant (entity id; negative = skolem)."""

    is_var: bool
    idx: int

    @property
    def is_skolem(self) -> bool:
        return not self.is_var and self.idx < 0


VAR_X = Term(True, X)
VAR_Y = Term(True, Y)


def var(i: int) -> Term:
    return Term(True, i + _FIRST_FRESH)


def const(entity: int) -> Term:
    return Term(False, entity)


def skolem(i: int) -> Term:
    return Term(False, -(i + 1))


@dataclass(frozen=True)
class Atom:
    pred: int
    subj: Term
    obj: Term

    @property
    def terms(self) -> tuple[Term, Term]:
        return (self.subj, self.obj)


@dataclass(frozen=True)
class Rule:
    """A chain rule head <- body. Construction renumbers fresh variables."""

    head: Atom
    body: tuple[Atom, ...] = ()

    def __post_init__(self):
        mapping: dict[int, int] = {X: X, Y: Y}
        atoms = []
        changed = False
        for atom in (self.head, *self.body):
            terms = []
            for t in atom.terms:
                if t.is_var:
                    if t.idx not in mapping:
                        mapping[t.idx] = _FIRST_FRESH + len(mapping) - 2
                    new = mapping[t.idx]
                    if new != t.idx:
                        changed = True
                    terms.append(Term(True, new))
                else:
                    terms.append(t)
            atoms.append(Atom(atom.pred, terms[0], terms[1]))
        if changed:
            object.__setattr__(self, "head", atoms[0])
            object.__setattr__(self, "body", tuple(atoms[1:]))
        else:
            object.__setattr__(self, "body", tuple(self.body))

    @property
    def atoms(self) -> tuple[Atom, ...]:
        return (self.head, *self.body)

    def __getitem__(self, i: int) -> Atom:
        """Positional accessor: [0] is the head, [1..n] the body."""
        return self.atoms[i]

    def sort_key(self):
        return tuple((a.pred, t.is_var, t.idx)
                     for a in self.atoms for t in a.terms)


# ---------------------------------------------------------------------------
# syntactic checks

def body_length(rule: Rule) -> int:
    return len(rule.body)


def constants(rule: Rule) -> set[int]:
    return {t.idx for a in rule.atoms for t in a.terms if not t.is_var}


def deduction_level(rule: Rule) -> int:
    """Number of distinct constants in the rule."""
    return len(constants(rule))


def _occurrences(rule: Rule) -> dict[Term, int]:
    counts: dict[Term, int] = {}
    for atom in rule.atoms:
        for t in atom.terms:
            counts[t] = counts.get(t, 0) + 1
    return counts


def is_straight(rule: Rule) -> bool:
    """Every term occurs at most twice across head and body."""
    return all(c <= 2 for c in _occurrences(rule).values())


def is_connected(rule: Rule) -> bool:
    """Every body atom shares a term with its predecessor (head first)."""
    prev = set(rule.head.terms)
    for atom in rule.body:
        cur = set(atom.terms)
        if not prev & cur:
            return False
        prev = cur
    return True


def dangling_term(rule: Rule) -> Term:
    """The term of the last body atom not shared with the previous atom."""
    if not rule.body:
        raise KindError("rule has an empty body")
    prev = set(rule.atoms[-2].terms)
    last = rule.body[-1]
    free = [t for t in last.terms if t not in prev]
    # pass-through atom (e.g. closed rule ending on Y): fall back to the
    # term that is not the connector in walk order
    return free[-1] if free else last.obj


def kind_of(rule: Rule) -> str:
    """Classify a rule as CAR, OAR, HAR, BAR, generic INSR or OPEN.

    OPEN covers abstract rules outside the walker's shapes (Y in the body
    without closing the chain back to X).
    """
    d = deduction_level(rule)
    body_terms = {t for a in rule.body for t in a.terms}
    if d == 0:
        if VAR_Y not in body_terms:
            return "OAR"
        return "CAR" if VAR_X in body_terms else "OPEN"
    head_const = not rule.head.obj.is_var and rule.head.subj == VAR_X
    if head_const and d == 1:
        return "HAR"
    if (head_const and d == 2 and rule.body
            and not dangling_term(rule).is_var):
        return "BAR"
    return "INSR"


def reverse_body(rule: Rule) -> Rule:
    return Rule(rule.head, tuple(reversed(rule.body)))


def skolemize(rule: Rule) -> Rule:
    """Replace every variable with a fresh skolem constant (injective)."""
    mapping: dict[Term, Term] = {}

    def sub(t: Term) -> Term:
        if not t.is_var:
            return t
        if t not in mapping:
            mapping[t] = skolem(len(mapping))
        return mapping[t]

    atoms = [Atom(a.pred, sub(a.subj), sub(a.obj)) for a in rule.atoms]
    return Rule(atoms[0], tuple(atoms[1:]))


# ---------------------------------------------------------------------------
# paths and abstraction

@dataclass(frozen=True)
class Path:
    """A ground walk: head triple atom first, adjacent atoms share an entity.

    ``entities`` is the visited-entity sequence, starting at the head
    subject and ending where the walk stopped.
    """

    atoms: tuple[Atom, ...]
    entities: tuple[int, ...]

    def __post_init__(self):
        head = self.atoms[0]
        if head.subj.is_var or head.obj.is_var:
            raise ValueError("path atoms must be ground")
        if self.entities[0] != head.subj.idx:
            raise ValueError("walk must start at the head subject")
        if len(self.entities) != len(self.atoms):
            raise ValueError("one visited entity per body step expected")
        cur = self.entities[0]
        for atom, nxt in zip(self.atoms[1:], self.entities[1:]):
            ends = {atom.subj.idx, atom.obj.idx}
            if cur not in ends or nxt not in ends:
                raise ValueError("adjacent path atoms must share an entity")
            cur = nxt


def generalize(path: Path) -> Rule:
    """Abstract a path into a CAR or an OAR.

    The head subject maps to X, the head object to Y and the remaining
    distinct entities to fresh variables in walk order. Raises
    StraightnessError for revisiting walks.
    """
    head = path.atoms[0]
    e0, e1 = head.subj.idx, head.obj.idx
    mapping: dict[int, Term] = {e0: VAR_X, e1: VAR_Y}
    fresh = 0
    atoms = [Atom(head.pred, VAR_X, VAR_Y)]
    for atom in path.atoms[1:]:
        terms = []
        for t in atom.terms:
            if t.idx not in mapping:
                mapping[t.idx] = var(fresh)
                fresh += 1
            terms.append(mapping[t.idx])
        atoms.append(Atom(atom.pred, terms[0], terms[1]))
    rule = Rule(atoms[0], tuple(atoms[1:]))
    if not is_straight(rule):
        raise StraightnessError("walk revisits an entity")
    return rule


# ---------------------------------------------------------------------------
# specialization templates

@dataclass(frozen=True)
class RuleTemplate:
    """A rule with variable slots marked for constant instantiation."""

    rule: Rule
    slots: tuple[Term, ...]


def specialize_templates(oar: Rule) -> tuple[RuleTemplate, RuleTemplate]:
    """HAR and BAR templates for an OAR with a non-empty body."""
    if not oar.body:
        raise KindError("the top rule has no body atom to anchor")
    if kind_of(oar) != "OAR":
        raise KindError(f"expected an OAR, got {kind_of(oar)}")
    har = RuleTemplate(oar, (VAR_Y,))
    bar = RuleTemplate(oar, (VAR_Y, dangling_term(oar)))
    return har, bar


def instantiate(template: RuleTemplate, bindings: dict[Term, int]) -> Rule:
    """Bind the template's marked slots to entity constants."""
    if set(bindings) != set(template.slots):
        raise ValueError("bindings must cover exactly the marked slots")
    values = list(bindings.values())
    if len(set(values)) != len(values):
        raise StraightnessError("bound constants must be pairwise distinct")
    if set(values) & constants(template.rule):
        raise StraightnessError("bound constant collides with a rule constant")

    def sub(t: Term) -> Term:
        return const(bindings[t]) if t in bindings else t

    atoms = [Atom(a.pred, sub(a.subj), sub(a.obj))
             for a in template.rule.atoms]
    rule = Rule(atoms[0], tuple(atoms[1:]))
    if not is_straight(rule):
        raise StraightnessError("instantiation violates straightness")
    return rule


# ---------------------------------------------------------------------------
# text grammar:  HEAD <- ATOM(", " ATOM)*   ATOM := pred(term,term)

_VAR_RE = re.compile(r"V(\d+)$")
_SK_RE = re.compile(r"sk(\d+)$")
_ATOM_RE = re.compile(r"\s*([^(,]+)\(([^,()]+),\s*([^,()]+)\)\s*")


def _parse_term(text: str, entities: Interner, intern: bool) -> Term:
    text = text.strip()
    if text == "X":
        return VAR_X
    if text == "Y":
        return VAR_Y
    m = _VAR_RE.match(text)
    if m:
        return var(int(m.group(1)))
    m = _SK_RE.match(text)
    if m:
        return skolem(int(m.group(1)))
    if intern:
        return const(entities.intern(text))
    idx = entities.get(text)
    if idx is None:
        raise ParseError(f"unknown constant {text!r}")
    return const(idx)


def _format_term(t: Term, entities: Interner) -> str:
    if t.is_var:
        if t.idx == X:
            return "X"
        if t.idx == Y:
            return "Y"
        return f"V{t.idx - _FIRST_FRESH}"
    if t.is_skolem:
        return f"sk{-t.idx - 1}"
    return entities.name(t.idx)


def parse_rule(text: str, entities: Interner, relations: Interner,
               intern: bool = True) -> Rule:
    """Parse rule text; raises ParseError with the failing position."""
    if "<-" not in text:
        raise ParseError(f"missing '<-' in {text!r}")
    head_text, body_text = text.split("<-", 1)

    def parse_atom(chunk: str, pos: int) -> Atom:
        m = _ATOM_RE.fullmatch(chunk)
        if not m:
            raise ParseError(f"bad atom at position {pos}: {chunk.strip()!r}")
        pred = relations.intern(m.group(1).strip()) if intern \
            else relations.get(m.group(1).strip())
        if pred is None:
            raise ParseError(f"unknown predicate {m.group(1).strip()!r}")
        return Atom(pred,
                    _parse_term(m.group(2), entities, intern),
                    _parse_term(m.group(3), entities, intern))

    head = parse_atom(head_text, 0)
    body = []
    if body_text.strip():
        pos = len(head_text) + 2
        for chunk in body_text.split(", "):
            body.append(parse_atom(chunk, pos))
            pos += len(chunk) + 2
    return Rule(head, tuple(body))


def format_rule(rule: Rule, entities: Interner, relations: Interner) -> str:
    def fmt(atom: Atom) -> str:
        return (f"{relations.name(atom.pred)}("
                f"{_format_term(atom.subj, entities)},"
                f"{_format_term(atom.obj, entities)})")

    head = fmt(rule.head)
    if not rule.body:
        return f"{head} <-"
    return f"{head} <- " + ", ".join(fmt(a) for a in rule.body)
