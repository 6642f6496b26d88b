# SPDX-License-Identifier: MIT

import pytest

from torsion import ConfigError, Settings, SpecTypoWarning, load_settings
from torsion._ctx import DEFAULT_BUDGET


def test_defaults():
    settings = load_settings(environ={})

    assert settings == Settings()
    assert settings.budget == DEFAULT_BUDGET
    assert settings.tolerance == 0.05
    assert settings.t_max == 12


def test_replace_ignores_none():
    settings = Settings().replace(budget=None, t_max=4)

    assert settings.budget == DEFAULT_BUDGET
    assert settings.t_max == 4


@pytest.mark.parametrize('table', ['[torsion]', '[tool.torsion]'])
def test_load_table(tmp_path, table):
    path = tmp_path / 'torsion.toml'
    path.write_text(f'{table}\nbudget = 1000\ntolerance = 0.1\nt-max = 6\n')

    settings = load_settings(path, environ={})

    assert settings.budget == 1000
    assert settings.tolerance == 0.1
    assert settings.t_max == 6
    assert settings.grid_bound == 6


def test_environment_overrides_file(tmp_path):
    path = tmp_path / 'torsion.toml'
    path.write_text('[torsion]\nbudget = 1000\n')

    assert load_settings(path, environ={'TORSION_BUDGET': '50'}).budget == 50


@pytest.mark.parametrize('value', ['lots', '0', '-3'])
def test_environment_invalid(value):
    with pytest.raises(ConfigError, match='TORSION_BUDGET|budget'):
        load_settings(environ={'TORSION_BUDGET': value})


def test_missing_table_is_defaults(tmp_path):
    path = tmp_path / 'pyproject.toml'
    path.write_text('[project]\nname = "demo"\n')

    assert load_settings(path, environ={}) == Settings()


def test_table_typo_warns(tmp_path):
    path = tmp_path / 'torsion.toml'
    path.write_text('[torsio]\nbudget = 1000\n')

    with pytest.warns(SpecTypoWarning, match="did you mean 'torsion'"):
        assert load_settings(path, environ={}) == Settings()


def test_key_typo_warns(tmp_path):
    path = tmp_path / 'torsion.toml'
    path.write_text('[torsion]\nbudgett = 1000\n')

    with pytest.warns(SpecTypoWarning, match="Found 'budgett'.*did you mean 'budget'"):
        settings = load_settings(path, environ={})

    assert settings.budget == DEFAULT_BUDGET


def test_unknown_key(tmp_path):
    path = tmp_path / 'torsion.toml'
    path.write_text('[torsion]\ncolour = "red"\n')

    with pytest.raises(ConfigError, match="^Invalid configuration: unknown key 'colour'"):
        load_settings(path, environ={})


@pytest.mark.parametrize(
    ('line', 'error'),
    [
        ('budget = true', "'budget' must be a number, got True"),
        ('budget = 0', "'budget' must be a positive integer, got 0"),
        ('t_max = 2.5', "'t_max' must be a positive integer, got 2.5"),
        ('tolerance = "small"', "'tolerance' must be a positive number, got 'small'"),
        ('tolerance = -0.5', "'tolerance' must be a positive number, got -0.5"),
    ],
)
def test_invalid_values(tmp_path, line, error):
    path = tmp_path / 'torsion.toml'
    path.write_text(f'[torsion]\n{line}\n')

    with pytest.raises(ConfigError) as excinfo:
        load_settings(path, environ={})

    assert str(excinfo.value) == f'Invalid configuration: {error}'


def test_table_not_a_table(tmp_path):
    path = tmp_path / 'torsion.toml'
    path.write_text('torsion = 3\n')

    with pytest.raises(ConfigError, match='must be a table'):
        load_settings(path, environ={})


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError, match='does not exist'):
        load_settings(tmp_path / 'torsion.toml', environ={})


def test_malformed_file(tmp_path):
    path = tmp_path / 'torsion.toml'
    path.write_text('[torsion\n')

    with pytest.raises(ConfigError, match='failed to parse'):
        load_settings(path, environ={})


def test_undecodable_file(tmp_path):
    path = tmp_path / 'torsion.toml'
    path.write_bytes(b'[torsion]\nbudget = 1\n\xff\n')

    with pytest.raises(ConfigError, match='not valid UTF-8'):
        load_settings(path, environ={})
