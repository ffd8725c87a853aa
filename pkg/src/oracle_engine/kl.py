"""
KL - Divergences, subset weights and the exploration/exploitation KL ledger
"""

import itertools
import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Dict, FrozenSet, Hashable, List, Mapping, Sequence, Tuple, Union

import numpy as np
from scipy.special import comb, entr, rel_entr

from config import JOINT_SUM_TOL, PATH_CAPACITY
from src.core_engine import ArgumentError, CapacityError, entropy
from .joint_table import JointTable, conditional

logger = logging.getLogger(__name__)

Distribution = Union[np.ndarray, Sequence[float], Mapping[Hashable, float]]


@dataclass(frozen=True)
class KLResult:
    """KL value in nats; an absolute-continuity violation gives inf with the flag set."""

    value: float
    support_violation: bool = False

    def __float__(self) -> float:
        return self.value


def _aligned(q: Distribution, p: Distribution) -> Tuple[np.ndarray, np.ndarray]:
    if isinstance(q, Mapping) or isinstance(p, Mapping):
        if not (isinstance(q, Mapping) and isinstance(p, Mapping)):
            raise ArgumentError("cannot compare a mapping pmf with an array pmf")
        keys = list(set(q) | set(p))
        return (
            np.array([q.get(key, 0.0) for key in keys], dtype=np.float64),
            np.array([p.get(key, 0.0) for key in keys], dtype=np.float64),
        )
    q_arr = np.asarray(q, dtype=np.float64).reshape(-1)
    p_arr = np.asarray(p, dtype=np.float64).reshape(-1)
    if q_arr.shape != p_arr.shape:
        raise ArgumentError(f"distributions differ in size: {q_arr.size} vs {p_arr.size}")
    return q_arr, p_arr


def kl_divergence(q: Distribution, p: Distribution) -> KLResult:
    """
    D_KL(q || p) = sum q log(q / p) with 0 log(0 / p) = 0.

    Args:
        q: Arrays of equal size, or outcome -> probability mappings
        p: Reference distribution in the same form as q

    Returns:
        KLResult; value is inf and support_violation is set when p(x) = 0 < q(x)
    """
    q_arr, p_arr = _aligned(q, p)
    violation = bool(np.any((q_arr > 0) & (p_arr <= 0)))
    if violation:
        logger.warning("KL divergence is infinite: q puts mass where p has none")
        return KLResult(math.inf, True)
    return KLResult(math.fsum(rel_entr(q_arr, p_arr).tolist()))


def phi_weight(parent_size: int, subset_size: int) -> float:
    """phi(J | I') = 1 / ((|I'| + 1) C(|I'|, |J|)) for any J subset of I' with |J| = subset_size."""
    if not 0 <= subset_size <= parent_size:
        raise ArgumentError(f"subset size {subset_size} outside [0, {parent_size}]")
    return 1.0 / ((parent_size + 1) * comb(parent_size, subset_size, exact=True))


@dataclass(frozen=True)
class SubsetWeight:
    """The law phi(. | I') over all subsets of a parent set."""

    parent: Tuple[int, ...]
    weights: Dict[FrozenSet[int], float] = field(default_factory=dict)

    def __post_init__(self):
        total = math.fsum(self.weights.values())
        if abs(total - 1.0) > JOINT_SUM_TOL:
            raise ArgumentError(f"subset weights sum to {total!r}, not 1")

    @classmethod
    def over(cls, parent: Sequence[int]) -> "SubsetWeight":
        parent = tuple(parent)
        weights = {
            frozenset(subset): phi_weight(len(parent), size)
            for size in range(len(parent) + 1)
            for subset in itertools.combinations(parent, size)
        }
        return cls(parent, weights)


@dataclass(frozen=True)
class KLDecomposition:
    """
    Chain-rule split of D_KL(q || p) for the two-stage law p, plus the three entropy terms.

    ``term_b`` uses the permutation average; ``term_b_literal`` sums over subsets with phi.
    """

    positions: Tuple[int, ...]
    chain_lhs: float
    chain_rhs1: float
    chain_rhs2: float
    term_a: float
    term_b: float
    term_c: float
    term_b_literal: float
    joint_entropy: float

    @property
    def bound(self) -> float:
        """Upper bound term_a - term_b + term_c on chain_lhs."""
        return self.term_a - self.term_b + self.term_c

    @property
    def chain_gap(self) -> float:
        return self.chain_lhs - self.chain_rhs1 - self.chain_rhs2

    def to_dict(self) -> Dict:
        record = asdict(self)
        record["positions"] = list(self.positions)
        record["bound"] = self.bound
        return record


def _expected_conditional_entropy(q: JointTable, position: int, given: Sequence[int]) -> float:
    """E_{x_J ~ q_J} H(q_{i|J}(. | x_J)) from the marginal table of J + (i,)."""
    joint = q.marginal(list(given) + [position]).reshape(-1, q.alphabet_size)
    mass = joint.sum(axis=1)
    keep = mass > 0
    cond = joint[keep] / mass[keep, None]
    return float(np.dot(mass[keep], entr(cond).sum(axis=1)))


def _expected_conditional_entropy_literal(q: JointTable, position: int, given: Sequence[int]) -> float:
    """Same expectation through explicit enumeration of x_J and conditional()."""
    given = list(given)
    if not given:
        return entropy(q.marginal_categorical(position))
    mass_table = q.marginal(given)
    terms = []
    for tokens in itertools.product(range(q.alphabet_size), repeat=len(given)):
        mass = float(mass_table[tokens])
        if mass > 0:
            terms.append(mass * entropy(conditional(q, position, dict(zip(given, tokens)))))
    return math.fsum(terms)


def _permutation_average(q: JointTable, positions: Sequence[int]) -> float:
    sums = []
    for order in itertools.permutations(positions):
        sums.append(
            math.fsum(_expected_conditional_entropy(q, i, order[:l]) for l, i in enumerate(order))
        )
    return math.fsum(sums) / len(sums)


def _phi_enumeration(q: JointTable, positions: Sequence[int]) -> float:
    terms = []
    for i in positions:
        others = [j for j in positions if j != i]
        phi = SubsetWeight.over(others)
        for subset, weight in phi.weights.items():
            terms.append(weight * _expected_conditional_entropy_literal(q, i, sorted(subset)))
    return math.fsum(terms)


def _two_stage_law(q: JointTable, positions: List[int], rest: List[int]) -> np.ndarray:
    """p(x) = prod_{i in I} q_i(x_i) prod_{j not in I} q_{j|I}(x_j | x_I), axes in natural order."""
    s = q.alphabet_size
    law = np.ones(())
    for i in positions:
        law = np.multiply.outer(law, q.marginal([i]))
    q_i = q.marginal(positions) if positions else np.ones(())
    for j in rest:
        joint = q.marginal(positions + [j]) if positions else q.marginal([j])
        with np.errstate(invalid="ignore", divide="ignore"):
            cond = np.where(q_i[..., None] > 0, joint / q_i[..., None], 1.0 / s)
        extra = law.ndim - len(positions)
        law = law[..., None] * cond.reshape(cond.shape[:-1] + (1,) * extra + (s,))
    order = positions + rest
    return np.transpose(law, np.argsort(order))


def _conditional_rows(table: np.ndarray, positions: List[int], rest: List[int], s: int) -> np.ndarray:
    rows = np.transpose(table, positions + rest).reshape(s ** len(positions), s ** len(rest))
    return rows


def kl_decomposition_terms(q: JointTable, positions: Sequence[int]) -> KLDecomposition:
    """
    Exact KL ledger for unmasking the set I in one product step, then the rest given x_I.

    Args:
        q: Joint table
        positions: The set I, unmasked first with product-of-marginals sampling

    Returns:
        KLDecomposition with chain_lhs = chain_rhs1 + chain_rhs2 and
        chain_lhs <= term_a - term_b + term_c

    Raises:
        CapacityError: if the |I|! permutation sweep over the table is too large
    """
    positions = sorted(int(i) for i in positions)
    if len(set(positions)) != len(positions) or any(not 0 <= i < q.length for i in positions):
        raise ArgumentError(f"invalid position set {positions} for D={q.length}")
    if math.factorial(len(positions)) * q.probs.size > PATH_CAPACITY:
        raise CapacityError(f"|I|! |S|^D exceeds the path capacity {PATH_CAPACITY}")
    rest = [d for d in range(q.length) if d not in positions]
    s = q.alphabet_size

    p = _two_stage_law(q, positions, rest)
    chain_lhs = kl_divergence(q.probs, p)

    q_i = q.marginal(positions).reshape(-1) if positions else np.ones(1)
    product = np.ones(())
    for i in positions:
        product = np.multiply.outer(product, q.marginal([i]))
    chain_rhs1 = kl_divergence(q_i, product.reshape(-1))

    q_rows = _conditional_rows(q.probs, positions, rest, s)
    p_rows = _conditional_rows(p, positions, rest, s)
    p_mass = p_rows.sum(axis=1)
    row_terms = []
    for mass, q_row, p_row, p_total in zip(q_i, q_rows, p_rows, p_mass):
        if mass > 0:
            row_terms.append(mass * kl_divergence(q_row / mass, p_row / p_total).value)
    chain_rhs2 = math.fsum(row_terms)

    term_a = math.fsum(entropy(q.marginal_categorical(i)) for i in positions)
    term_b = _permutation_average(q, positions) if positions else 0.0
    term_b_literal = _phi_enumeration(q, positions)
    term_c = math.fsum(
        mass * math.fsum(entropy(conditional(q, j, dict(zip(positions, tokens)))) for j in rest)
        for tokens, mass in zip(itertools.product(range(s), repeat=len(positions)), q_i)
        if mass > 0
    )
    joint_entropy = float(entr(q_i).sum())

    decomposition = KLDecomposition(
        tuple(positions),
        chain_lhs.value,
        chain_rhs1.value,
        chain_rhs2,
        term_a,
        term_b,
        term_c,
        term_b_literal,
        joint_entropy,
    )
    logger.debug(f"KL ledger I={positions}: lhs={decomposition.chain_lhs:.6g} bound={decomposition.bound:.6g}")
    return decomposition
