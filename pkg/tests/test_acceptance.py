"""Desk-scale acceptance suite, one test per criterion.

Each test prints a single PASS/FAIL line (visible with ``pytest -v``); the
checks themselves live in :mod:`greenfb.reproduce` and are shared with the
``greenfb reproduce`` command.
"""

import os

import pytest

from greenfb import reproduce as R

WORKERS = os.cpu_count() or 1


def _report(result, capsys):
    with capsys.disabled():
        print("\n" + result.line())
    assert result.passed, result.line()


def test_01_poisson_identities(capsys):
    _report(R.check_poisson(), capsys)


def test_02_truncation_bound(capsys):
    _report(R.check_truncation(), capsys)


def test_03_hitting_time_decomposition(capsys):
    _report(R.check_hitting_decomposition(), capsys)


def test_04_kernel_psd(capsys):
    _report(R.check_gram_psd(), capsys)


def test_05_block_separation(capsys):
    _report(R.check_block_separation(), capsys)


def test_06_margin_fixtures(capsys):
    _report(R.check_margin_fixtures(), capsys)


@pytest.mark.slow
def test_07_d0_green_vs_hitting_time(capsys):
    _report(R.check_d0(workers=WORKERS), capsys)


@pytest.mark.slow
def test_08_d1a_detection(capsys):
    _report(R.check_d1a(workers=WORKERS), capsys)


@pytest.mark.slow
def test_09_o1_oracle_overlap(capsys):
    _report(R.check_o1(workers=WORKERS), capsys)


def test_10_metric_sanity(capsys):
    _report(R.check_metric_sanity(), capsys)


@pytest.mark.slow
def test_11_cli_determinism(capsys):
    _report(R.check_determinism(), capsys)
