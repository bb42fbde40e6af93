"""Differentially private hypothesis tests for contingency tables."""

from ._core import (
    CountTable,
    DphtError,
    NoisyTable,
    SensitivityReport,
    Statistic,
    Test,
    TestResult,
    brute_force_sensitivity,
    builtin_fixture,
    chi2_independence,
    classical_pvalue_chi2,
    exact,
    ks_uniform,
    lr_independence,
    naive_js_pvalue,
    parse_table,
    permutation_null_sample,
    privatize,
    run_test,
    sample_multinomial_gaussian,
    sensitivity,
    testbed_pvalue,
)

__all__ = [
    "CountTable",
    "DphtError",
    "NoisyTable",
    "SensitivityReport",
    "Statistic",
    "Test",
    "TestResult",
    "brute_force_sensitivity",
    "builtin_fixture",
    "chi2_independence",
    "classical_pvalue_chi2",
    "exact",
    "ks_uniform",
    "lr_independence",
    "naive_js_pvalue",
    "parse_table",
    "permutation_null_sample",
    "privatize",
    "run_test",
    "sample_multinomial_gaussian",
    "sensitivity",
    "testbed_pvalue",
]
