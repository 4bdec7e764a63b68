import io
import json
import os

import pandas as pd
import pytest

from main import main

CONFIG_PATH = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'scenario_config.json')
ALPHA_MAX_LOW = 1.0 - (0.96 + 0.2816 ** 0.5) / 2.0


def _run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def _table(out):
    return pd.read_csv(io.StringIO(out))


# --- Configuration errors ---

def test_invalid_costs_exit_code(capsys):
    code, out, err = _run(capsys, 'report', '--cr', '0.6', '--cs', '0.7')
    assert code == 2
    assert out == ''
    assert "c_s < c_r violated" in err


def test_missing_cost(capsys):
    code, _, err = _run(capsys, 'report', '--cr', '0.6')
    assert code == 2
    assert "'report' needs c_s" in err


def test_unknown_config_section(capsys, tmp_path):
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps({'costs': {'c_r': 0.6, 'c_s': 0.4}, 'weather': {}}))
    code, _, err = _run(capsys, 'report', '--config', str(path))
    assert code == 2
    assert "Unknown configuration section: 'weather'" in err


def test_invalid_delta_exit_code(capsys):
    code, _, err = _run(capsys, 'report', '--cr', '0.6', '--cs', '0.4', '--delta', '0.3')
    assert code == 2
    assert "0 < delta < c_r - c_s" in err


# --- report ---

def test_report_on_boundary_fee(capsys):
    code, out, _ = _run(capsys, 'report', '--cr', '0.6', '--cs', '0.4', '--alpha', '0.2',
                        '--alpha-grid-n', '200')
    assert code == 0
    doc = json.loads(out)
    assert doc['command'] == 'report'
    assert doc['case'] == 'i'
    outcomes = doc['subgame']['outcomes']
    assert outcomes[0]['label'] == 'prind_s'
    assert outcomes[0]['price_lo'] == pytest.approx(0.75)
    assert doc['thresholds']['alpha_rstar'] == pytest.approx(0.5)
    assert doc['fee_game']['alpha_star'] == pytest.approx(0.5)
    assert doc['outside_option'] is None


def test_report_from_config_file(capsys):
    code, out, _ = _run(capsys, 'report', '--config', CONFIG_PATH, '--alpha-grid-n', '500')
    assert code == 0
    doc = json.loads(out)
    assert doc['scenario']['delta'] == 0.1
    assert doc['subgame']['equilibrium']['retailer_payoff'] == pytest.approx(0.08)
    outside = doc['outside_option']
    assert outside['alpha_star_o'] == pytest.approx(ALPHA_MAX_LOW, abs=1e-6)
    assert outside['leaving_seller_payoff'] == pytest.approx(0.04)


def test_report_is_byte_identical_across_runs(capsys):
    args = ('report', '--config', CONFIG_PATH, '--alpha', '0.45', '--alpha-grid-n', '200')
    code_a, first, _ = _run(capsys, *args)
    code_b, second, _ = _run(capsys, *args)
    assert code_a == code_b == 0
    assert first == second


def test_report_written_to_file(capsys, tmp_path):
    target = tmp_path / "out" / "report.json"
    code, out, _ = _run(capsys, 'report', '--cr', '0.6', '--cs', '0.5', '--alpha-grid-n', '200',
                        '--out', str(target))
    assert code == 0
    assert out == ''
    doc = json.loads(target.read_text())
    assert doc['case'] == 'ii'
    assert doc['subgame'] is None


# --- region-map ---

def test_region_map_along_seller_cost(capsys):
    code, out, _ = _run(capsys, 'region-map', '--cr', '0.6', '--points', '10')
    assert code == 0
    table = _table(out)
    assert len(table) == 100
    infeasible = table[table['outcome_label'] == 'infeasible']
    assert set(infeasible['x'].round(6)) == {0.65, 0.75, 0.85, 0.95}
    assert infeasible['price_lo'].isna().all()

    case_ii = table[(table['x'] > 0.45) & (table['outcome_label'] != 'infeasible')]
    assert not case_ii.empty
    assert 'psstar_s' not in set(case_ii['outcome_label'])
    assert 'psstar_s' in set(table[table['x'] < 0.45]['outcome_label'])


# --- payoff-curves ---

def test_price_curves_with_markers(capsys):
    code, out, _ = _run(capsys, 'payoff-curves', '--cr', '0.6', '--cs', '0.4', '--alpha', '0.5',
                        '--grid-n', '11')
    assert code == 0
    table = _table(out)
    markers = table.set_index(table['marker'].fillna(''))
    assert 'p_rind' not in markers.index
    assert markers.loc['p_sind', 'pi_ss'] == pytest.approx(0.0, abs=1e-12)
    assert markers.loc['p_dagger', 'pi_rs'] == pytest.approx(0.04)
    assert table['p'].is_monotonic_increasing


def test_alpha_curves_with_leaving_payoff(capsys):
    code, out, _ = _run(capsys, 'payoff-curves', '--cr', '0.6', '--cs', '0.4', '--mode', 'alpha',
                        '--alpha-grid-n', '20', '--delta', '0.062')
    assert code == 0
    table = _table(out)
    assert list(table.columns) == ['alpha', 'pi_r_eq', 'pi_s_eq', 'region_label', 'pi_s_leave']
    assert len(table) == 20
    assert table['pi_s_leave'].iloc[0] == pytest.approx((0.6 - 0.462) * 0.4)
    assert table['region_label'].iloc[-1] == 'prstar_r'


def test_price_curves_need_alpha(capsys):
    code, _, err = _run(capsys, 'payoff-curves', '--cr', '0.6', '--cs', '0.4', '--mode', 'price')
    assert code == 2
    assert "needs a fee" in err


# --- fee-sweep ---

def test_fee_sweep_skips_infeasible_costs(capsys):
    code, out, _ = _run(capsys, 'fee-sweep', '--cr', '0.6', '--points', '4', '--alpha-grid-n', '50')
    assert code == 0
    table = _table(out)
    assert table['x'].tolist() == [0.125, 0.375]
    for x, a in zip(table['x'], table['alpha_star_low']):
        assert a == pytest.approx(1.0 - x / 0.8)


def test_fee_sweep_json(capsys):
    code, out, _ = _run(capsys, 'fee-sweep', '--cs', '0.2', '--axis', 'cr', '--points', '3',
                        '--alpha-grid-n', '50', '--format', 'json')
    assert code == 0
    doc = json.loads(out)
    assert doc['command'] == 'fee-sweep'
    assert [row['x'] for row in doc['rows']] == [pytest.approx(0.5), pytest.approx(5 / 6)]


# --- verify ---

def test_verify_flags_perturbed_thresholds(capsys):
    code, out, _ = _run(capsys, 'verify', '--cr', '0.6', '--cs', '0.4', '--grid-n', '201',
                        '--alpha-grid-n', '100', '--perturb-fee', '0.1')
    assert code == 1
    doc = json.loads(out)
    assert doc['perturb_fee'] == 0.1
    assert doc['report']['disagreements'] >= 1


def test_verify_random_draws_are_reproducible(capsys):
    args = ('verify', '--draws', '2', '--grid-n', '101', '--seed', '3')
    code_a, first, _ = _run(capsys, *args)
    code_b, second, _ = _run(capsys, *args)
    assert code_a == code_b == 0
    assert first == second
    assert json.loads(first)['report']['draws'] == 2


def test_verify_random_draws_on_default_grid(capsys):
    code, out, _ = _run(capsys, 'verify', '--draws', '10')
    assert code == 0
    report = json.loads(out)['report']
    assert report['grid_n'] == 2001
    assert report['disagreements'] == 0, report['failures']


def test_coarse_grid_reports_at_least_as_many_ambiguous_cells(capsys):
    code_coarse, coarse, _ = _run(capsys, 'verify', '--draws', '10', '--grid-n', '101')
    code_fine, fine, _ = _run(capsys, 'verify', '--draws', '10', '--grid-n', '2001')
    assert code_coarse == code_fine == 0
    coarse, fine = json.loads(coarse)['report'], json.loads(fine)['report']
    assert coarse['boundary_ambiguous'] >= fine['boundary_ambiguous']
