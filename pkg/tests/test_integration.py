# SPDX-License-Identifier: MIT

import json
import os
import subprocess
import sys

from fractions import Fraction

import pytest

import torsion.__main__


pytestmark = pytest.mark.contextvars

SPECS = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'specs')


def run_check(capsys, *cli_args):
    code = torsion.__main__.run(['verify', *cli_args, '--format', 'json'])
    data = json.loads(capsys.readouterr().out)
    assert code == 0, data['witnesses']['counterexamples']
    assert data['results']['passed'] is True
    return data


@pytest.mark.parametrize('check', ['gammamn', 'full-level', 'mu'])
@pytest.mark.parametrize('kind', ['noncm', 'cmsplit', 'cmnonsplit'])
@pytest.mark.parametrize(('ell', 'level'), [(2, 1), (2, 2), (2, 3), (3, 1), (3, 2), (3, 3), (5, 1), (5, 2)])
def test_group_checks(capsys, check, kind, ell, level):
    run_check(capsys, check, '--ell', str(ell), '--level', str(level), '--kind', kind)


@pytest.mark.parametrize('kind', ['noncm', 'cmsplit', 'cmnonsplit'])
def test_property_mu_modulo_125(capsys, kind):
    run_check(capsys, 'mu', '--ell', '5', '--level', '3', '--kind', kind)


@pytest.mark.parametrize('check', ['gammamn', 'full-level'])
@pytest.mark.parametrize('kind', ['cmsplit', 'cmnonsplit'])
def test_cm_group_checks_modulo_125(capsys, check, kind):
    run_check(capsys, check, '--ell', '5', '--level', '3', '--kind', kind)


@pytest.mark.parametrize(('ell', 'level'), [(2, 1), (2, 2), (3, 1), (3, 2)])
def test_degree_oracle(capsys, ell, level):
    run_check(capsys, 'oracle', '--ell', str(ell), '--level', str(level))


@pytest.mark.parametrize(
    ('ell', 'model', 'levels'),
    [
        (2, 'noncm,noncm', '1'),
        (2, 'noncm,cmnonsplit', '1'),
        (3, 'noncm,cmsplit', '1'),
    ],
)
def test_parallelogram_oracle(capsys, ell, model, levels):
    run_check(capsys, 'parallelogram', '--ell', str(ell), '--model', model, '--levels', levels, '--oracle')


@pytest.mark.parametrize('model', ['noncm,noncm', 'noncm,cmsplit', 'cmsplit,cmsplit'])
def test_parallelogram_stable_in_level(capsys, model):
    data = run_check(capsys, 'parallelogram', '--model', model, '--levels', '1,2,3')

    assert data['constants']['C'] == '3/2'


@pytest.mark.parametrize('ell', [2, 3, 5])
@pytest.mark.parametrize('model', ['noncm,noncm', 'noncm,cmnonsplit', 'cmsplit,cmnonsplit', 'cmnonsplit,cmnonsplit'])
def test_parallelogram_formula_to_level_24(capsys, ell, model):
    levels = ','.join(str(level) for level in range(1, 25))

    data = run_check(capsys, 'parallelogram', '--ell', str(ell), '--model', model, '--levels', levels)

    assert data['inputs']['levels'] == list(range(1, 25))
    # R is 1 when some lower exponent is 0 and ell / (ell - 1) otherwise
    assert data['constants']['C'] == str(Fraction(ell, ell - 1))


@pytest.mark.parametrize('spec', ['one-cm.json', 'one-noncm.json', 'two-noncm.json'])
def test_convergence(capsys, spec):
    run_check(capsys, 'convergence', '--spec', os.path.join(SPECS, spec), '--t-max', '12')


def test_alpha_eq_m_universe(capsys):
    data = run_check(capsys, 'alpha-eq-m', '--max-classes', '4', '--max-multiplicity', '3', '--grid-bound', '6')

    assert data['constants']['specs'] == 209


def test_closed_forms(capsys):
    run_check(capsys, 'closed-forms', '--max-count', '6')


@pytest.mark.parametrize(
    'call',
    [
        [sys.executable, '-m', 'torsion'],
        ['torsion'],
    ],
    ids=['module', 'entrypoint'],
)
def test_command_line(call):
    if call[0] == 'torsion':
        exe = os.path.join(os.path.dirname(sys.executable), f"torsion{'.exe' if sys.platform.startswith('win') else ''}")
        if not os.path.exists(exe):
            pytest.skip('Running via PYTHONPATH, so the torsion entrypoint is not available')
        call = [exe]

    output = subprocess.check_output([*call, 'alpha', '--spec', os.path.join(SPECS, 'two-noncm.json'), '-f', 'json'])

    assert json.loads(output)['results']['value'] == '4/7'
