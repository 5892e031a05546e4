"""Shared fixture corpus: the worked examples used across the test suite."""

from __future__ import annotations

from dx import Schema, parse_instance, parse_mapping, parse_query
from dx.textio import SourceText

# mapping/instance/query sources, one block per scenario

COPY_MAP = "source R/2. target Rp/2. tgd R(x,y) -> Rp(x,y)."
COPY_SRC = "R(a,b)."
COPY_QUERY = "q(x,y) := forall z: Rp(x,y) /\\ (Rp(x,z) -> z = y)."

LEQ1_MAP = "source P/1. target E/2. tgd P(x) -> E(x,x)."
LEQ2_MAP = (
    "source P/1. target E/2. tgd P(x) -> E(x,x). tgd P(x) -> exists z: E(x,z)."
)
LEQ_SRC = "P(a)."
LEQ_QUERY = "q(x) := exists z: E(x,z) /\\ forall z2: E(x,z2) -> z2 = z."

# one tgd with a lone existential; doubles as the unique-successor scenario
# and as the no-unique-minimal-solution scenario
PE_MAP = "source P/1. target E/2. tgd P(x) -> exists z: E(x,z)."
PE_SRC = "P(a)."
PE_QUERY = "q(x) := exists z: E(x,z)."

EF_MAP = "source R/2. target E/2, F/2. tgd R(x,y) -> exists z: E(x,z), F(z,y)."
EF_SRC = "R(a,b)."
EF_Q2 = (
    "q() := forall z1: forall z2: forall z3: "
    "(E(a,z1) /\\ E(a,z2) /\\ E(a,z3)) -> z1 = z2 \\/ z1 = z3 \\/ z2 = z3."
)
EF_Q3 = "q() := forall z: forall y: F(z,y) -> y = b."
EF_UCQ = "q(x) := exists z: E(x,z)."

EFF_MAP = (
    "source P/1. target E/2, F/2. "
    "tgd P(x) -> exists z1, z2: E(x,z1), F(z1,z2)."
)
EFF_QUERY = "q() := forall z1: forall z2: F(z1,z2) -> exists x: E(x,z1)."

C23_MAP = (
    "source P/1. target E/2. "
    "constraint forall x: P(x) -> exists[2,3] z: E(x,z)."
)
C23_QUERY = (
    "q(x) := exists z1: exists z2: E(x,z1) /\\ E(x,z2) /\\ "
    "(forall z3: E(x,z3) -> z3 = z1 \\/ z3 = z2)."
)

MOT_MAP = (
    "source P/1. target E/2, F/2.\n"
    "tgd P(x) -> exists z1, z2: E(z1,z2).\n"
    "constraint forall x: forall x2: forall y: (E(x,y) /\\ E(x2,y)) -> F(x,x2)."
)
MOT_SOLUTION = (
    "E(c1,c). E(c2,c). F(c1,c1). F(c1,c2). F(c2,c1). F(c2,c2)."
)

NAF_INSTANCE = "E(a,b). E(a,_x). E(b,_x). E(b,_y). E(b,_z). E(_y,_z)."
BLK_INSTANCE = (
    "E(_n1,a). E(_n1,b). E(_n1,_m1). E(_m1,c). "
    "E(_n2,a). E(_n2,b). E(_n2,_m2). E(c,_m2)."
)

CLQ_MAP = (
    "source E0/2, C0/2. target E/2, C/2, A/2.\n"
    "tgd E0(x,y) -> E(x,y).\n"
    "tgd C0(x,y) -> exists z1, z2: C(x,y), A(x,z1), A(y,z2)."
)
CLQ_QUERY = (
    "q() := forall x: forall y: forall z1: forall z2: "
    "(C(x,y) /\\ A(x,z1) /\\ A(y,z2)) -> E(z1,z2)."
)

E_SCHEMA = Schema.of({"E": 2})


def mapping(text):
    return parse_mapping(SourceText(text, "fixture.dx"))


def instance(text, schema):
    return parse_instance(SourceText(text, "fixture.inst"), schema)


def query(text, schema):
    return parse_query(SourceText(text, "fixture.q"), schema)


def clique_source(edges, k=3):
    """Source for the clique mapping: an undirected graph plus k marker
    constants connected pairwise."""
    lines = []
    for i, j in edges:
        lines.append(f"E0(v{i},v{j}).")
        lines.append(f"E0(v{j},v{i}).")
    for i in range(1, k + 1):
        for j in range(1, k + 1):
            if i != j:
                lines.append(f"C0(k{i},k{j}).")
    return " ".join(lines)
