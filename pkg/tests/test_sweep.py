import io
import math

import numpy as np
import pytest

from fairsvm.data import SyntheticConfig, synthesize
from fairsvm.exceptions import InputError
from fairsvm.sweep import SweepRecord, SweepSpec, read_records, run_sweep, select_lambda, summarize, write_records


@pytest.fixture(scope="module")
def data():
    return synthesize(SyntheticConfig(n=120, seed=3))


def cells(records):
    return [r for r in records if r.kind == "cell"]


class TestSpec:
    def test_defaults(self):
        spec = SweepSpec()
        assert spec.d_grid == (0.0, 0.001, 0.002, 0.005, 0.01, 0.025, 0.05, 0.1)
        assert spec.folds == 5 and spec.rounds == 5 and spec.train_fraction == 0.7

    @pytest.mark.parametrize("kwargs", [{"d_grid": ()}, {"mu_grid": (-1.0,)}, {"methods": ("svm",)},
                                        {"lambda_grid": (0.0,)}, {"folds": 1}, {"rounds": 0},
                                        {"train_fraction": 1.0}])
    def test_invalid(self, kwargs):
        with pytest.raises(InputError):
            SweepSpec(**kwargs)


class TestRunSweep:
    def test_counts(self, data):
        spec = SweepSpec(methods=("lsvm", "zsvm", "ssvm"), d_grid=(0.05,), mu_grid=(1.0,), rounds=1,
                         lambda_grid=(0.1, 1.0))
        records = run_sweep(data, spec)
        assert len(cells(records)) == 3
        assert len(records) == 3 + 3

    def test_mu_zero_rows_match_zsvm(self, data):
        spec = SweepSpec(d_grid=(0.0, 0.05), mu_grid=(0.0,), rounds=2, lambda_grid=(1.0,))
        records = cells(run_sweep(data, spec))
        by_key = {(r.method, r.d, r.round): r for r in records}
        for (method, d, rnd), r in by_key.items():
            if method == "ssvm":
                z = by_key[("zsvm", d, rnd)]
                for attr in ("auc_y", "dp_delta", "eo_delta"):
                    assert getattr(r, attr) == pytest.approx(getattr(z, attr), abs=1e-6)

    def test_canonical_order_and_jobs(self, data):
        spec = SweepSpec(d_grid=(0.1, 0.0), mu_grid=(10.0, 0.0), rounds=2, lambda_grid=(1.0,))
        serial = run_sweep(data, spec)
        parallel = run_sweep(data, spec, jobs=2)
        keys = [r.sort_key() for r in cells(serial)]
        assert keys == sorted(keys)
        strip = [(r.method, r.d, r.mu, r.round, r.auc_y, r.dp_delta, r.eo_delta, r.status) for r in serial]
        assert strip == [(r.method, r.d, r.mu, r.round, r.auc_y, r.dp_delta, r.eo_delta, r.status)
                         for r in parallel]

    def test_metrics_in_unit_interval(self, data):
        spec = SweepSpec(methods=("lsvm", "ksvm", "fair-ksvm"), d_grid=(0.05,), mu_grid=(1.0,), rounds=1,
                         lambda_grid=(1.0,))
        for r in run_sweep(data, spec):
            assert r.status == "ok"
            for v in (r.auc_y, r.dp_delta, r.eo_delta):
                assert 0.0 <= v <= 1.0

    def test_failed_cell_recorded(self, data):
        spec = SweepSpec(methods=("ssvm",), d_grid=(0.05,), mu_grid=(1.0,), rounds=1, lambda_grid=(1.0,),
                         max_ccp_iters=1, ccp_tol=1e-6)
        # force the inner solver to give up by capping its iterations
        import fairsvm.sweep as sweep_mod
        original = sweep_mod.CcpConfig

        def tiny(**kw):
            return original(inner_max_iter=1, **kw)

        sweep_mod.CcpConfig = tiny
        try:
            records = run_sweep(data, spec)
        finally:
            sweep_mod.CcpConfig = original
        cell = cells(records)[0]
        assert cell.status.startswith("failed")
        assert math.isnan(cell.auc_y)
        assert records[-1].status == "failed cells: 1/1"

    def test_select_lambda_prefers_first_on_ties(self, data):
        lam = select_lambda(data, (1e6, 2e6), folds=3, seed=0)
        assert lam == 1e6


class TestRecordsIO:
    def test_round_trip(self):
        rec = [SweepRecord("cell", "ssvm", 0.05, 10.0, 0, 0, 1.0, 0.75, 0.1, 0.2, 3.0, 0.01, "ok"),
               SweepRecord("cell", "zsvm", 0.0, 0.0, 1, 0, 0.1, math.nan, math.nan, math.nan, 0.0, 0.0,
                           "failed: solver, stopped")]
        rec += summarize(rec)
        buf = io.StringIO()
        write_records(rec, buf, comment="fairsvm sweep --d 0")
        text = buf.getvalue()
        assert text.startswith("# fairsvm sweep --d 0\n")
        back = read_records(io.StringIO(text))
        assert len(back) == len(rec)
        for a, b in zip(rec, back):
            for x, y in zip(a.__dict__.values(), b.__dict__.values()):
                if isinstance(x, float) and math.isnan(x):
                    assert math.isnan(y)
                elif isinstance(x, float):
                    assert y == pytest.approx(x, rel=1e-9)
                else:
                    assert x == y

    def test_bad_header(self):
        with pytest.raises(InputError):
            read_records(io.StringIO("a,b\n1,2\n"))

    def test_summary_means(self):
        rec = [SweepRecord("cell", "lsvm", 0.0, 0.0, r, 0, 1.0, a, 0.1, 0.2, 0.0, 1.0, "ok")
               for r, a in enumerate([0.6, 0.8])]
        (mean,) = summarize(rec)
        assert mean.kind == "mean" and mean.round == -1
        assert mean.auc_y == pytest.approx(0.7)
        np.testing.assert_allclose(mean.dp_delta, 0.1)
