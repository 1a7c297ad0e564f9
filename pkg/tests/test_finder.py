import numpy as np
import pytest

from blockfinder.const.defaults import ONE, SCALE
from blockfinder.exceptions import (InvalidCandidateError, InvalidConfigError, InvalidPortfolioError,
                                    PivotRatioZeroError, PortfolioMismatchError)
from blockfinder.finder import (FinderParams, Portfolio, binary_find, find_accounts, normalized_score,
                                score, target_balance, target_slack)
from blockfinder.snapshot import AccountBalance
from blockfinder.utils import to_fixed


def _ids(accounts: list[AccountBalance]) -> list[int]:
    return [a.address for a in accounts]


# -------------------------------------------------
# score

@pytest.mark.parametrize('alphas, balances, expected', [
    (['0.5', '0.5'], [5, 5], '2'),
    (['0.6', '0.4'], [3, 7], '1.4'),
    (['1'], ['42.5'], '1'),
])
def test_score(alphas, balances, expected):
    assert score([to_fixed(a) for a in alphas], [to_fixed(b) for b in balances]) == to_fixed(expected)


def test_score_rejects_zero_tuple():
    with pytest.raises(InvalidCandidateError):
        score([ONE // 2, ONE // 2], [0, 0])
    with pytest.raises(ValueError):
        score([ONE], [ONE, ONE])


def _random_alphas(rng: np.random.Generator, m: int) -> list[int]:
    cuts = sorted(int(x) for x in rng.integers(0, ONE + 1, size=m - 1))
    bounds = [0, *cuts, ONE]
    return [hi - lo for lo, hi in zip(bounds[:-1], bounds[1:])]


def test_score_bounds_and_scale_invariance():
    rng = np.random.default_rng(7)
    for _ in range(10_000):
        m = int(rng.integers(1, 6))
        alphas = _random_alphas(rng, m)
        balances = [int(x) for x in rng.integers(0, 10 ** 15, size=m)]
        if sum(balances) == 0:
            continue

        s = score(alphas, balances)
        assert (m - 2) * SCALE <= s <= m * SCALE
        for lam in (2, 10, 1000):
            assert score(alphas, [b * lam for b in balances]) == s


@pytest.mark.parametrize('s, m, expected', [
    ('2', 2, '1'),
    ('1.4', 2, '0.7'),
    ('0.98', 1, '0.98'),
])
def test_normalized_score(s, m, expected):
    assert normalized_score(to_fixed(s), m) == to_fixed(expected)


# -------------------------------------------------
# target_balance

@pytest.mark.parametrize('a, alpha_1, alpha_i, expected', [
    ('10', '0.5', '0.25', '5'),
    ('10', '0.5', '0.5', '10'),
    ('7.13', '0.2', '0.8', '28.52'),
])
def test_target_balance(a, alpha_1, alpha_i, expected):
    assert target_balance(to_fixed(a), to_fixed(alpha_1), to_fixed(alpha_i)) == to_fixed(expected)


def test_target_balance_zero_pivot():
    with pytest.raises(PivotRatioZeroError):
        target_balance(ONE, 0, ONE)


# -------------------------------------------------
# binary_find

@pytest.mark.parametrize('b, expected', [
    ('7.99', [5, 6]),
    ('6.0', [3, 4]),
    ('6.6', [3, 4, 5]),
    ('0.5', []),
    ('1.22', []),
    ('12.61', []),
    ('1.23', [1]),
    ('12.6', [7]),
])
def test_binary_find_seven_accounts(seven_accounts, b, expected):
    assert _ids(binary_find(seven_accounts, to_fixed(b))) == expected


def test_binary_find_empty():
    assert binary_find([], ONE) == []


def _linear_find(accounts: list[AccountBalance], b: int) -> list[AccountBalance]:
    if not accounts or b < accounts[0].balance or b > accounts[-1].balance:
        return []
    exact = [a for a in accounts if a.balance == b]
    if exact:
        return exact
    below = max(a.balance for a in accounts if a.balance < b)
    above = min(a.balance for a in accounts if a.balance > b)
    return [a for a in accounts if a.balance in (below, above)]


def test_binary_find_matches_linear_scan():
    rng = np.random.default_rng(11)
    for _ in range(10_000):
        n = int(rng.integers(0, 201))
        # few distinct values, many ties
        values = rng.integers(1, int(rng.integers(2, 40)), size=n) * ONE
        accounts = sorted((AccountBalance(k + 1, int(v)) for k, v in enumerate(values)), key=lambda a: a.sort_key)
        b = int(rng.integers(0, 42)) * ONE + int(rng.choice([0, ONE // 2]))
        assert binary_find(accounts, b) == _linear_find(accounts, b)


@pytest.mark.parametrize('b, tolerance, expected', [
    (to_fixed('12.6') + 5, 5, [7]),
    (to_fixed('12.6') + 5, 4, []),
    (to_fixed('1.23') - 3, 3, [1]),
    (to_fixed('6.5'), to_fixed('0.7'), [3, 4, 5]),
    (to_fixed('7.0'), to_fixed('1.3'), [3, 4, 5, 6]),
])
def test_binary_find_tolerance(seven_accounts, b, tolerance, expected):
    assert _ids(binary_find(seven_accounts, b, tolerance=tolerance)) == expected


def test_target_slack_covers_floored_alphas():
    rng = np.random.default_rng(5)
    for _ in range(2_000):
        held = [int(x) for x in rng.integers(1, 10 ** 16, size=2)]
        p = Portfolio.from_balances({1: held[0], 2: held[1]})
        alpha_1, alpha_i = p.weights([1, 2])
        if alpha_1 == 0:
            continue
        target = target_balance(held[0], alpha_1, alpha_i)
        assert abs(target - held[1]) <= target_slack(held[0], alpha_1, alpha_i)


# -------------------------------------------------
# portfolio

def test_portfolio_validation(tmp_path):
    with pytest.raises(InvalidPortfolioError):
        Portfolio.from_list(['0.5', '0.6'])
    with pytest.raises(InvalidPortfolioError):
        Portfolio.from_list(['1.5', '-0.5'])
    with pytest.raises(InvalidPortfolioError):
        Portfolio({})

    p = Portfolio.from_list(['0.2', '0.8'], currency_ids=[3, 1])
    assert p.currency_ids == [1, 3]
    assert p.alpha(3) == to_fixed('0.2')

    path = tmp_path / 'portfolio.json'
    p.save(path)
    assert Portfolio.load(path) == p


def test_portfolio_from_balances_scores_m():
    held = {1: to_fixed('3.3'), 2: to_fixed('1.7'), 3: to_fixed('9.1')}
    p = Portfolio.from_balances(held)
    assert score(p.weights([1, 2, 3]), [held[1], held[2], held[3]]) == 3 * ONE


# -------------------------------------------------
# find_accounts

@pytest.fixture
def planted(make_snapshot):
    # user accounts (7, 3, 9) hold exactly 0.5 : 0.3 : 0.2 of 100
    snapshot = make_snapshot({
        1: [(7, 50), (1, 10), (2, 20), (4, 200)],
        2: [(3, 30), (1, 5), (2, 90), (4, 400)],
        3: [(9, 20), (1, 1), (2, 60), (5, 300)],
    })
    portfolio = Portfolio.from_list(['0.5', '0.3', '0.2'])
    return snapshot, portfolio


def test_planted_tuple(planted):
    snapshot, portfolio = planted
    result = find_accounts(snapshot, portfolio)
    assert result.best.addresses == (7, 3, 9)
    assert result.best.score == 3 * ONE
    assert result.best.normalized_score == ONE
    assert result.retained[0] == result.best
    assert [a.score for a in result.retained] == sorted((a.score for a in result.retained), reverse=True)


def test_threshold_and_top(planted):
    snapshot, portfolio = planted
    strict = find_accounts(snapshot, portfolio, FinderParams(score_threshold=to_fixed('2.99')))
    assert [a.addresses for a in strict.retained] == [(7, 3, 9)]

    top = find_accounts(snapshot, portfolio, FinderParams(max_answers=2))
    everything = find_accounts(snapshot, portfolio)
    assert top.retained == everything.retained[:2]

    # nothing can pass a threshold above m
    impossible = find_accounts(snapshot, portfolio, FinderParams(score_threshold=4 * ONE))
    assert impossible.best is None and not impossible.hit

    with pytest.raises(InvalidConfigError):
        FinderParams(max_answers=0)


def test_single_currency_ties_to_smallest_address(make_snapshot):
    snapshot = make_snapshot({1: [(8, 3), (5, 1), (6, 9)]})
    result = find_accounts(snapshot, Portfolio.from_list(['1']))
    assert result.best.addresses == (5,)
    assert result.best.score == ONE
    assert all(a.score == ONE for a in result.retained)
    assert [a.addresses for a in result.retained] == [(5,), (6,), (8,)]


def test_zero_alpha_currency_excluded(planted):
    snapshot, _ = planted
    portfolio = Portfolio.from_list(['0.625', '0.375', '0'])
    result = find_accounts(snapshot, portfolio)
    assert result.excluded_currencies == [3]
    assert result.best.addresses == (7, 3)
    assert result.best.m == 2
    assert result.best.score == 2 * ONE


def test_portfolio_mismatch(planted):
    snapshot, _ = planted
    with pytest.raises(PortfolioMismatchError):
        find_accounts(snapshot, Portfolio.from_list(['0.5', '0.5']))


def test_empty_db_is_a_miss(make_snapshot):
    snapshot = make_snapshot({1: [], 2: [(1, 4)]})
    result = find_accounts(snapshot, Portfolio.from_list(['0.5', '0.5']))
    assert result.best is None
    assert result.pivots == 0


def test_pivot_misses_counted(make_snapshot):
    snapshot = make_snapshot({1: [(1, 1), (2, 100)], 2: [(1, 40), (2, 50), (3, 60)]})
    result = find_accounts(snapshot, Portfolio.from_list(['0.5', '0.5']))
    # pivot 1 targets 1 (below db 2), pivot 2 targets 100 (above it)
    assert result.pivot_misses == 2
    assert result.best is None


def test_true_account_at_db_max_is_found(make_snapshot):
    # 10 ulp against 3: alphas floor to 3 ulp and 0.999999999996
    snapshot = make_snapshot({1: [(4, '0.00000000001')], 2: [(1, 1), (2, 2), (6, 3)]})
    portfolio = Portfolio.from_balances({1: 10, 2: 3 * ONE})
    assert portfolio.weights([1, 2]) == [3, ONE - 4]

    target = target_balance(10, 3, ONE - 4)
    assert target == 3_333_333_333_320
    assert binary_find(snapshot.db(2).accounts, target) == []

    result = find_accounts(snapshot, portfolio)
    assert result.best.addresses == (4, 6)
    assert result.best.score == 2 * ONE
    assert [a.addresses for a in result.retained] == [(4, 6)]


def test_candidate_product_limit(make_snapshot):
    snapshot = make_snapshot({1: [(1, 5)], 2: [(k, 5) for k in range(1, 6)], 3: [(k, 5) for k in range(1, 6)]})
    # equal thirds, one ulp short of 1, so every target is exactly 5
    portfolio = Portfolio({1: ONE // 3, 2: ONE // 3, 3: ONE // 3})
    result = find_accounts(snapshot, portfolio, FinderParams(candidate_product_limit=10))
    assert result.overflow_pivots == 1
    assert result.best is None
    assert find_accounts(snapshot, portfolio).tuples_scored == 25


def test_workers_do_not_change_the_answer(random_snapshot, noisy_portfolio):
    rng = np.random.default_rng(3)
    snapshot = random_snapshot(rng, 3, 60)
    portfolio = noisy_portfolio(rng, snapshot)
    params = FinderParams(max_answers=20)
    serial = find_accounts(snapshot, portfolio, params)
    parallel = find_accounts(snapshot, portfolio, params, workers=2)
    assert parallel.to_dict() == serial.to_dict()
