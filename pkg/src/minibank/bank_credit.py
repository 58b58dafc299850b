"""Customer credit: loan repayment, target lending, and realised lending.

Banks lend to their own customers only.  A new loan expands the balance
sheet on both sides at once (retail loans against loan deposits) and a
repayment shrinks both.  Two target rules are supported: lending up to a
multiple of the reserve holding (money multiplication), and lending out
reserves held in excess of a target ratio of deposits (fractional reserve).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ConfigError, ConsistencyError
from .ledger import BankBalanceSheets, CustomerBook, ReserveBase, sum_reserve
from .stochastics import TriangularParams, sample_triangular


class LendingBehaviour(Enum):
    MONEY_MULTIPLICATION = "money_multiplication"
    FRACTIONAL_RESERVE = "fractional_reserve"


@dataclass(frozen=True)
class LendingPolicy:
    """Everything a bank's credit department needs for one scenario."""

    behaviour: LendingBehaviour
    reserve_base: ReserveBase
    gamma_rr: float                   # regulatory floor of the target reserve ratio
    gamma_tr_noise: TriangularParams  # nonnegative noise added to the floor each period
    repayment: TriangularParams       # per-bank loan repayment ratio law
    absorption: TriangularParams      # share of target lending the economy absorbs
    relax_target_base: bool = False   # target against l1 + l2 only, freeing interbank credit

    def __post_init__(self):
        if not 0 < self.gamma_rr <= 1:
            raise ConfigError("gamma_RR: must lie in (0, 1]")
        if self.gamma_tr_noise.lower < 0:
            raise ConfigError("gamma_TR_noise: must be nonnegative")
        for name, law in (("psi", self.repayment), ("theta", self.absorption)):
            if law.lower < 0 or law.upper > 1:
                raise ConfigError(f"{name}: ratio law must stay within [0, 1]")


def draw_target_ratios(policy: LendingPolicy, n_banks: int, rng: np.random.Generator) -> np.ndarray:
    """Per-bank target reserve ratio for one period: the floor plus noise."""
    noise = sample_triangular(policy.gamma_tr_noise, rng, n_banks)
    return policy.gamma_rr + noise


def repay_customer_loans(banks: BankBalanceSheets, book: CustomerBook,
                         policy: LendingPolicy, rng: np.random.Generator) -> np.ndarray:
    """Retire a random fraction of each bank's loan deposits against its
    retail loan book.

    The drawn ratio applies to the deposit stock; repayment is capped by
    the bank's own outstanding loans, which matters once wire inflows have
    pushed a bank's loan deposits past the loans it originated itself.
    Customer balances shrink pro rata.  Returns the per-bank repaid amount.
    """
    ratios = sample_triangular(policy.repayment, rng, banks.n_banks)
    repaid = np.minimum(ratios * banks.l2, banks.a2)
    np.maximum(repaid, 0.0, out=repaid)
    if not repaid.any():
        return repaid
    factor = np.ones(banks.n_banks)
    funded = banks.l2 > 0
    factor[funded] = 1.0 - repaid[funded] / banks.l2[funded]
    book.l2 = book.l2 * factor[book.assignment]
    banks.a2 = banks.a2 - repaid
    banks.l2 = banks.l2 - repaid
    return repaid


def target_lending(banks: BankBalanceSheets, policy: LendingPolicy, target_ratio) -> np.ndarray:
    """Per-bank lending target, computed from one common pre-lending snapshot.

    Money multiplication targets total deposits of reserves / ratio; the
    fractional-reserve rule lends out reserves above ratio * deposits.
    Both floor at zero: banks do not call loans to correct an overshoot.
    """
    base = sum_reserve(banks, policy.reserve_base)
    dep = banks.l1 + banks.l2
    if not policy.relax_target_base:
        dep = dep + banks.l3
    if policy.behaviour is LendingBehaviour.MONEY_MULTIPLICATION:
        potential = base / target_ratio - dep
    else:
        potential = base - target_ratio * dep
    return np.maximum(potential, 0.0)


def realise_lending(banks: BankBalanceSheets, book: CustomerBook, potential: np.ndarray,
                    policy: LendingPolicy, rng: np.random.Generator) -> np.ndarray:
    """Grant the absorbed share of each bank's lending target.

    Retail loans and loan deposits grow together; the new deposits are
    split equally across the bank's customers.  Returns per-bank amounts.
    """
    share = sample_triangular(policy.absorption, rng, banks.n_banks)
    actual = share * potential
    if not actual.any():
        return np.zeros(banks.n_banks)
    counts = book.counts()
    if np.any((actual > 0) & (counts == 0)):
        raise ConsistencyError("a bank with no customers cannot place new loan deposits")
    per_head = np.divide(actual, counts, out=np.zeros(banks.n_banks), where=counts > 0)
    book.l2 = book.l2 + per_head[book.assignment]
    banks.a2 = banks.a2 + actual
    banks.l2 = banks.l2 + actual
    return actual
