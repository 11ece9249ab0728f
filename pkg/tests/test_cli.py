import numpy as np
import pytest
from click.testing import CliRunner

from gncoset.cli import _hex_bits, main
from gncoset.code import construct_product_gaussian_approx, encode, load_code_spec, save_code_spec
from gncoset.decoder import load_schedule, default_schedule, save_schedule

CONFIG = """\
code: {n: 6, K: 42, construction: product, design_snr_db: 5.0}
decoder: {t_max: 4}
channel: {snr_range: [1.0, 3.0, 1.0]}
sim: {max_frames: 1500, target_block_errors: 20, seed: 3}
ga: {population_size: 4, max_generations: 4, target_bler: 0.05, snr_lo: 0, snr_hi: 8,
     tol_db: 0.1, max_frames: 300, target_block_errors: 15}
schedules: [table2, zero]
"""


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def config(tmp_path):
    path = tmp_path / "exp.yaml"
    path.write_text(CONFIG)
    return path


def csv_body(text):
    return [line for line in text.splitlines() if not line.startswith("#")]


class TestConstruct:
    def test_fig4_size(self, runner, tmp_path):
        out = tmp_path / "code.txt"
        res = runner.invoke(main, ["construct", "--n", "10", "--K", "885", "--design-snr-db", "6.8",
                                   "-o", str(out)])
        assert res.exit_code == 0, res.output
        assert load_code_spec(out).K == 885

    def test_full_rate(self, runner):
        res = runner.invoke(main, ["construct", "--n", "4", "--K", "16"])
        assert res.exit_code == 0
        assert f"A={','.join(map(str, range(16)))}" in res.output

    def test_k_zero(self, runner):
        res = runner.invoke(main, ["construct", "--n", "10", "--K", "0"])
        assert res.exit_code == 2
        assert "K must be" in res.stderr

    def test_from_config(self, runner, config):
        res = runner.invoke(main, ["construct", "--config", str(config)])
        assert res.exit_code == 0
        assert "n=6\nK=42\n" in res.output


class TestSimulate:
    def test_byte_identical_across_workers(self, runner, config, tmp_path):
        outs = []
        for workers in ("1", "4", "1"):
            out = tmp_path / f"sim{len(outs)}.csv"
            res = runner.invoke(main, ["simulate", "--config", str(config), "--workers", workers,
                                       "-o", str(out)])
            assert res.exit_code == 0, res.output
            outs.append(out.read_bytes())
        assert outs[0] == outs[1] == outs[2]
        rows = csv_body(outs[0].decode())
        assert rows[0].startswith("es_n0_db,") and len(rows) == 4
        blers = [float(r.split(",")[4]) for r in rows[1:]]
        assert blers == sorted(blers, reverse=True)

    def test_seed_changes_output(self, runner, config):
        a = runner.invoke(main, ["simulate", "--config", str(config), "--seed", "1"]).output
        b = runner.invoke(main, ["simulate", "--config", str(config), "--seed", "2"]).output
        assert csv_body(a) != csv_body(b)

    def test_missing_config(self, runner, tmp_path):
        res = runner.invoke(main, ["simulate", "--config", str(tmp_path / "none.yaml")])
        assert res.exit_code == 3

    @pytest.mark.parametrize("text", [
        "code: {n: 6, K: 42}\nchannel: {snr_list_db: [1.0], snr_range: [1, 2, 1]}\n",
        "code: {n: 6, K: 42, bogus: 1}\nchannel: {snr_list_db: [1.0]}\n",
        "decoder: {schedule: file}\nchannel: {snr_list_db: [1.0]}\n",
        "code: [1, 2\n",
    ])
    def test_invalid_config(self, runner, tmp_path, text):
        path = tmp_path / "bad.yaml"
        path.write_text(text)
        assert runner.invoke(main, ["simulate", "--config", str(path)]).exit_code == 2

    def test_missing_referenced_file(self, runner, tmp_path):
        path = tmp_path / "bad.yaml"
        path.write_text("code: {construction: file, spec_path: nowhere.txt}\n")
        assert runner.invoke(main, ["simulate", "--config", str(path)]).exit_code == 3

    def test_file_sources(self, runner, tmp_path):
        save_code_spec(construct_product_gaussian_approx(6, 42, 5.0), tmp_path / "code.txt")
        save_schedule(default_schedule().truncated(4), tmp_path / "sched.csv")
        path = tmp_path / "exp.yaml"
        path.write_text(CONFIG.replace("{n: 6, K: 42, construction: product, design_snr_db: 5.0}",
                                       "{construction: file, spec_path: code.txt}")
                        .replace("{t_max: 4}", "{t_max: 4, schedule: file, schedule_path: sched.csv}"))
        ref = path.with_name("ref.yaml")
        ref.write_text(CONFIG)
        a = runner.invoke(main, ["simulate", "--config", str(path)])
        b = runner.invoke(main, ["simulate", "--config", str(ref)])
        assert a.exit_code == 0, a.output
        assert csv_body(a.output) == csv_body(b.output)


class TestSweep:
    def test_grid_and_determinism(self, runner, config):
        a = runner.invoke(main, ["sweep", "--config", str(config), "--workers", "1"])
        b = runner.invoke(main, ["sweep", "--config", str(config), "--workers", "4"])
        assert a.exit_code == 0, a.output
        assert a.output == b.output
        rows = csv_body(a.output)
        assert rows[0].startswith("schedule,es_n0_db,")
        assert [r.split(",")[0] for r in rows[1:]] == ["table2"] * 3 + ["zero"] * 3


class TestTrain:
    def run(self, runner, config, tmp_path, workers, extra=()):
        sched = tmp_path / f"sched{workers}.csv"
        traj = tmp_path / f"traj{workers}.csv"
        res = runner.invoke(main, ["train", "--config", str(config), "--workers", workers,
                                   "--schedule-out", str(sched), "--trajectory-out", str(traj), *extra])
        assert res.exit_code == 0, res.output
        return sched, traj

    def test_outputs_and_determinism(self, runner, config, tmp_path):
        s1, t1 = self.run(runner, config, tmp_path, "1")
        s4, t4 = self.run(runner, config, tmp_path, "4")
        assert s1.read_bytes() == s4.read_bytes() and t1.read_bytes() == t4.read_bytes()
        rows = csv_body(t1.read_text())
        assert rows[0] == "generation,best_fitness_db,median_fitness_db,evaluations,best_bracketed"
        best = [float(r.split(",")[1]) for r in rows[1:]]
        assert [int(r.split(",")[0]) for r in rows[1:]] == list(range(5))
        assert best == sorted(best, reverse=True)
        sched = load_schedule(s1)
        assert sched.t_max == 4
        assert f"best_fitness_db: {best[-1]!r}" in s1.read_text()

    def test_zero_generations(self, runner, config, tmp_path):
        config.write_text(CONFIG.replace("max_generations: 4", "max_generations: 0"))
        sched, traj = self.run(runner, config, tmp_path, "1")
        assert len(csv_body(traj.read_text())) == 2
        assert load_schedule(sched).t_max == 4

    def test_unbracketed_flagged(self, runner, config, tmp_path):
        config.write_text(CONFIG.replace("snr_hi: 8", "snr_hi: 0.5").replace("snr_lo: 0", "snr_lo: 0.0"))
        sched, traj = self.run(runner, config, tmp_path, "1")
        text = traj.read_text()
        assert "# unbracketed_evaluations: 0" not in text
        assert all(r.endswith(",0") for r in csv_body(text)[1:])


class TestDecode:
    @pytest.fixture
    def frame(self, tmp_path):
        spec = construct_product_gaussian_approx(4, 9, 3.0)
        save_code_spec(spec, tmp_path / "code.txt")
        info = np.array([1, 0, 1, 1, 0, 0, 1, 0, 1], dtype=np.uint8)
        return tmp_path / "code.txt", info, 20.0 * (1.0 - 2.0 * encode(info, spec))

    def write(self, path, llrs):
        path.write_text("".join(f"{float(v)!r}\n" for v in llrs))
        return path

    def invoke(self, runner, spec, llr, *extra):
        return runner.invoke(main, ["decode", "--spec", str(spec), "--llr", str(llr),
                                    "--es-n0-db", "3.0", *extra])

    def parse(self, output):
        lines = output.splitlines()
        kv = dict(line.split("=", 1) for line in lines if "=" in line)
        trace = [line.split(",") for line in lines[lines.index("iteration,graph,activations,skipped") + 1:]]
        return kv, trace

    def test_clean_codeword(self, runner, frame, tmp_path):
        spec, info, llrs = frame
        res = self.invoke(runner, spec, self.write(tmp_path / "l.txt", llrs))
        assert res.exit_code == 0, res.output
        kv, trace = self.parse(res.output)
        assert kv["info_hex"] == _hex_bits(info) == "b28"
        assert len(trace) == 8
        assert [int(r[2]) for r in trace] == [4, 0, 0, 0, 0, 0, 0, 0]

    def test_single_flipped_sign(self, runner, frame, tmp_path):
        spec, info, llrs = frame
        llrs = llrs.copy()
        llrs[0] = -llrs[0]
        kv, trace = self.parse(self.invoke(runner, spec, self.write(tmp_path / "l.txt", llrs)).output)
        assert kv["info_hex"] == _hex_bits(info)
        assert sum(int(r[2]) for r in trace[1:]) >= 1

    def test_length_mismatch(self, runner, frame, tmp_path):
        spec, _, llrs = frame
        res = self.invoke(runner, spec, self.write(tmp_path / "l.txt", llrs[:-1]))
        assert res.exit_code == 2
        assert "16" in res.stderr

    def test_truncated_schedule(self, runner, frame, tmp_path):
        spec, _, llrs = frame
        res = self.invoke(runner, spec, self.write(tmp_path / "l.txt", llrs), "--t-max", "3")
        assert len(self.parse(res.output)[1]) == 3


def test_hex_bits():
    assert _hex_bits([1, 0, 1, 1]) == "b"
    assert _hex_bits([1]) == "8"
    assert _hex_bits([0, 0, 0, 0, 1, 1, 1, 1, 1]) == "0f8"
