import numpy as np
import pytest

from minibank import BankBalanceSheets, CustomerBook


def consistent_state(l1, l2, assignment, n_banks):
    """Banks and customer book built from per-customer balances.

    Every bank starts with a1 = l1 and a2 = l2 (cash fully reserved, loans
    self-originated), so all accounting identities hold exactly.
    """
    assignment = np.asarray(assignment, dtype=np.int64)
    book = CustomerBook(
        assignment=assignment,
        l1=np.asarray(l1, dtype=float),
        l2=np.asarray(l2, dtype=float),
        n_banks=n_banks,
    )
    banks = BankBalanceSheets.zeros(n_banks)
    banks.l1 = book.bank_l1()
    banks.a1 = banks.l1.copy()
    banks.l2 = book.bank_l2()
    banks.a2 = banks.l2.copy()
    return banks, book


@pytest.fixture
def two_banks_two_customers():
    return consistent_state(l1=[100.0, 100.0], l2=[0.0, 0.0],
                            assignment=[0, 1], n_banks=2)
