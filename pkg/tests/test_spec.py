# SPDX-License-Identifier: MIT

import json

import pytest

from torsion import SpecDocument, SpecTypoWarning, SpecValidationError, load_spec, parse_spec
from torsion._spec import FactorEntry, parse_spec_data


def test_parse_spec():
    factors = '[{"label": "A", "cm": true, "multiplicity": 2}, {"label": "B", "cm": false}]'

    document = parse_spec(f'{{"ell": 5, "factors": {factors}}}')

    assert document.ell == 5
    assert document.factors == (FactorEntry('A', True, 2), FactorEntry('B', False, 1))
    assert document.to_variety().labels == ('A', 'B')
    assert document.to_variety().dimension == 3


def test_spec_document_round_trip():
    document = SpecDocument((FactorEntry('E1', False, 3),), ell=3)

    assert parse_spec(json.dumps(document.to_dict())) == document


def test_ell_is_optional():
    assert parse_spec('{"factors": [{"label": "E1", "cm": false}]}').ell is None


def test_invalid_spec_collects_every_error(spec_invalid):
    with pytest.raises(SpecValidationError) as excinfo:
        load_spec(spec_invalid)

    assert sorted(excinfo.value.errors) == [
        "duplicate label 'E1' at factors[0], factors[1]",
        'ell must be a prime number, got 4',
        'factors[1].multiplicity must be at least 1, got 0',
    ]
    assert str(excinfo.value).startswith('Invalid spec:\n  - ')


@pytest.mark.parametrize(
    ('data', 'error'),
    [
        ([], 'the document must be an object'),
        ({}, "missing 'factors'"),
        ({'factors': []}, "'factors' must be a nonempty list"),
        ({'factors': [1]}, 'factors[0] must be an object'),
        ({'factors': [{'cm': False}]}, 'factors[0].label must be a nonempty string'),
        ({'factors': [{'label': 'E1', 'cm': 'yes'}]}, 'factors[0].cm must be true or false'),
        ({'factors': [{'label': 'E1', 'cm': False, 'multiplicity': 1.5}]}, 'factors[0].multiplicity must be an integer'),
        ({'factors': [{'label': 'E1', 'cm': False, 'multiplicity': True}]}, 'factors[0].multiplicity must be an integer'),
        ({'ell': True, 'factors': [{'label': 'E1', 'cm': False}]}, 'ell must be a prime number, got True'),
        ({'factors': [{'label': 'E1', 'cm': False}], 'comment': 'x'}, "unknown key 'comment' in the document"),
    ],
)
def test_parse_spec_data_errors(data, error):
    with pytest.raises(SpecValidationError) as excinfo:
        parse_spec_data(data)

    assert error in excinfo.value.errors


def test_single_error_message():
    with pytest.raises(SpecValidationError, match="^Invalid spec: missing 'factors'$"):
        parse_spec_data({})


def test_malformed_json():
    with pytest.raises(SpecValidationError, match='malformed JSON'):
        parse_spec('{"factors": [')


def test_typo_warning():
    with pytest.warns(SpecTypoWarning, match="Found 'multiplicty' in factors\\[0\\], did you mean 'multiplicity'\\?"):
        with pytest.raises(SpecValidationError) as excinfo:
            parse_spec('{"factors": [{"label": "E1", "cm": false, "multiplicty": 2}]}')

    assert excinfo.value.errors == ("unknown key 'multiplicty' in factors[0]",)


def test_typo_warning_top_level():
    with pytest.warns(SpecTypoWarning, match="did you mean 'factors'"):
        with pytest.raises(SpecValidationError):
            parse_spec('{"factor": [{"label": "E1", "cm": false}]}')


def test_load_spec_toml(spec_two_classes):
    document = load_spec(spec_two_classes)

    assert document.ell == 3
    assert document.factors == (FactorEntry('E1', True, 2), FactorEntry('E2', False, 1))


def test_load_spec_json(spec_mixed):
    spec = load_spec(spec_mixed).to_variety()

    assert spec.labels == ('E1', 'E2', 'E3')
    assert spec.dimension == 4


def test_load_spec_missing(tmp_path):
    with pytest.raises(SpecValidationError, match='No such file or directory'):
        load_spec(tmp_path / 'missing.json')


def test_load_spec_malformed_toml(tmp_path):
    path = tmp_path / 'bad.toml'
    path.write_text('factors = [')

    with pytest.raises(SpecValidationError, match='malformed TOML'):
        load_spec(path)


@pytest.mark.parametrize('name', ['binary.json', 'binary.toml'])
def test_load_spec_undecodable(tmp_path, name):
    path = tmp_path / name
    path.write_bytes(b'\xff\xfe{}')

    with pytest.raises(SpecValidationError, match='not valid UTF-8'):
        load_spec(path)
