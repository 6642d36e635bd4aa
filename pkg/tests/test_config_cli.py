"""Tests for configuration documents, presets, figure datasets and the CLI."""
import pandas as pd
import pytest

from polspeckle.cli import EXIT_CONFIG, EXIT_OK, EXIT_RUNTIME, main
from polspeckle.core.errors import ConfigError, ReportError
from polspeckle.estimation.estimators import EstimatorKind
from polspeckle.experiments.config import parse_config, serialize_config
from polspeckle.experiments.datasets import FigureLayout, emit_figure_datasets, figure_tables
from polspeckle.experiments.montecarlo import CampaignSpec, run_campaign
from polspeckle.experiments.presets import load_preset, preset_names
from polspeckle.formats.pfmap import read_pfmap

MATRICES = """
[matrix G1]
a1 = 15
a2_re = 0.2
a2_im = 0.5
a4 = 6

[matrix G5]
a1 = 30
a2_re = 16
a2_im = -8
a4 = 14
"""

CAMPAIGN = """# small campaign
mode = campaign
realizations = 3
n_values = 20, 40
master_seed = 5
estimators = A, I
""" + MATRICES

FIGURES = """mode = figures
realizations = 4
n_values = 20, 40
figure_n = 40
figures = 1, 2, 3, 4, 5, 6
""" + MATRICES

SCENE = """mode = scene
width = 8
height = 6
seed = 3
window = 3
background = G1
estimators = four_image, correlated_pair, osci
""" + MATRICES + """
[region right]
x0 = 4
y0 = 0
x1 = 8
y1 = 6
matrix = G5
"""


class TestParseConfig:
    def test_campaign_document(self):
        config = parse_config(CAMPAIGN)
        assert config.mode == "campaign"
        assert config.n_values == (20, 40)
        assert config.estimators == (EstimatorKind.FOUR_IMAGE, EstimatorKind.CORRELATED_PAIR)
        assert config.gammas()["G5"].a2 == complex(16, -8)
        assert config.campaign_spec().master_seed == 5

    def test_scene_document(self):
        scene = parse_config(SCENE).scene_spec()
        assert (scene.width, scene.height, scene.seed) == (8, 6, 3)
        assert scene.regions[0].name == "right"
        assert scene.regions[0].gamma.a1 == 30.0

    def test_indefinite_matrix(self):
        text = "mode = campaign\nrealizations = 2\nn_values = 10\n\n[matrix bad]\na1 = -1\na4 = 1\n"
        with pytest.raises(ConfigError, match="positive semidefinite") as info:
            parse_config(text)
        assert info.value.line == 5
        assert "matrix 'bad'" in str(info.value)

    def test_unknown_key(self):
        with pytest.raises(ConfigError) as info:
            parse_config("mode = campaign\nrealisations = 10\n")
        assert info.value.line == 2
        assert info.value.key == "realisations"
        assert "line 2, key 'realisations'" in str(info.value)

    def test_duplicate_key(self):
        with pytest.raises(ConfigError, match="duplicate") as info:
            parse_config(CAMPAIGN + "a4 = 7\n")
        assert info.value.key == "a4"

    def test_bad_value(self):
        with pytest.raises(ConfigError, match="invalid value") as info:
            parse_config("mode = campaign\nrealizations = many\n")
        assert info.value.key == "realizations"

    def test_unknown_estimator(self):
        with pytest.raises(ConfigError, match="unknown estimator"):
            parse_config(CAMPAIGN.replace("A, I", "A, Q"))

    def test_validation_error_names_key(self):
        with pytest.raises(ConfigError) as info:
            parse_config(CAMPAIGN.replace("mode = campaign", "mode = campaign\nformat = xml"))
        assert info.value.key == "format"
        assert info.value.line == 3

    def test_missing_payload(self):
        with pytest.raises(ConfigError, match="requires 'realizations'"):
            parse_config("mode = campaign\nn_values = 10\n" + MATRICES)

    def test_duplicate_n_values(self):
        with pytest.raises(ConfigError, match="unique") as info:
            parse_config(CAMPAIGN.replace("n_values = 20, 40", "n_values = 20, 20"))
        assert info.value.key == "n_values"

    def test_scene_keys_rejected_in_campaign(self):
        with pytest.raises(ConfigError, match="does not take width"):
            parse_config(CAMPAIGN.replace("master_seed = 5", "master_seed = 5\nwidth = 4"))

    def test_malformed_section(self):
        with pytest.raises(ConfigError, match="malformed section") as info:
            parse_config("mode = campaign\n[matrix]\n")
        assert info.value.line == 2

    @pytest.mark.parametrize("text", [CAMPAIGN, FIGURES, SCENE])
    def test_serialize_round_trip(self, text):
        config = parse_config(text)
        assert parse_config(serialize_config(config)) == config

    def test_with_seed(self):
        assert parse_config(CAMPAIGN).with_seed(11).master_seed == 11
        assert parse_config(SCENE).with_seed(11).seed == 11


class TestPresets:
    def test_names(self):
        assert set(preset_names()) == {"paper-default", "paper-sweep", "paper-figures"}

    def test_paper_default(self):
        config = load_preset("paper-default")
        spec = config.campaign_spec()
        assert spec.matrix_names == ["G1", "G2", "G3", "G4", "G5", "G6"]
        assert spec.realizations == 1000
        assert spec.n_values == (10000,)
        assert config.figures == (1, 2)

    def test_paper_sweep(self):
        config = load_preset("paper-sweep")
        assert config.n_values == (100, 500, 1000, 5000, 10000)
        assert config.figure_layout().sweep_matrices == ("G1", "G5")

    def test_preset_matrices_match_reference(self, reference):
        gammas = load_preset("paper-figures").gammas()
        assert gammas == reference

    def test_unknown(self):
        with pytest.raises(ConfigError, match="unknown preset"):
            load_preset("paper-everything")


class TestFigureDatasets:
    @pytest.fixture(scope="class")
    def report(self):
        config = parse_config(FIGURES)
        return run_campaign(config.campaign_spec())

    @pytest.fixture
    def layout(self):
        return FigureLayout(grid_matrices=("G1", "G5"), figure_n=40, sweep_matrices=("G1", "G5"), sweep_n=(20, 40))

    def test_table_shapes(self, report, layout):
        tables = figure_tables(report, layout=layout)
        assert list(tables[1].columns) == ["matrix_id", "true_p2", "mean_A", "mean_I", "mean_OSCI"]
        assert list(tables[2].columns) == ["matrix_id", "sd_A", "sd_I", "sd_OSCI"]
        assert list(tables[3].columns) == ["n", "true_p2", "mean_A", "mean_I", "mean_OSCI"]
        assert list(tables[6].columns) == ["n", "n_var_A", "n_var_I", "n_var_OSCI"]
        assert list(tables[1]["matrix_id"]) == [1, 2]
        assert list(tables[4]["n"]) == [20, 40]

    def test_values_come_from_report(self, report, layout):
        tables = figure_tables(report, figures=(4,), layout=layout)
        cell = report.cell("G1", 20, EstimatorKind.CORRELATED_PAIR)
        assert tables[4]["n_var_I"].iloc[0] == cell.n_times_var

    def test_emit_writes_every_figure(self, report, layout, tmp_path):
        written = emit_figure_datasets(report, tmp_path, layout=layout)
        assert sorted(p.name for p in written) == [f"fig{k}.csv" for k in range(1, 7)]
        fig1 = pd.read_csv(tmp_path / "fig1.csv")
        assert len(fig1) == 2

    def test_json_values_are_strings(self, report, layout, tmp_path):
        emit_figure_datasets(report, tmp_path, figures=(1,), layout=layout, fmt="json")
        rows = pd.read_json(tmp_path / "fig1.json", dtype=False)
        assert isinstance(rows["true_p2"].iloc[0], str)

    def test_missing_cells_write_nothing(self, report, tmp_path):
        layout = FigureLayout(grid_matrices=("G1", "G5"), figure_n=10000, sweep_matrices=("G1", "G5"), sweep_n=(20,))
        with pytest.raises(ReportError, match=r"missing \(G1, 10000\), \(G5, 10000\)"):
            emit_figure_datasets(report, tmp_path, layout=layout)
        assert list(tmp_path.iterdir()) == []

    def test_report_must_cover_all_figure_estimators(self, tmp_path):
        config = parse_config(FIGURES)
        spec = CampaignSpec(matrices=tuple(config.gammas().items()), n_values=(40,), realizations=2,
                            estimators=(EstimatorKind.OSCI,))
        with pytest.raises(ReportError):
            figure_tables(run_campaign(spec), figures=(1,))


class TestCli:
    def _write(self, tmp_path, text, name="run.cfg"):
        path = tmp_path / name
        path.write_text(text)
        return str(path)

    def test_campaign_mode(self, tmp_path):
        out = tmp_path / "out"
        code = main(["--config", self._write(tmp_path, CAMPAIGN), "--out", str(out)])
        assert code == EXIT_OK
        frame = pd.read_csv(out / "campaign.csv")
        assert len(frame) == 2 * 2 * 2
        assert set(frame["estimator"]) == {"four_image", "correlated_pair"}

    def test_figures_mode_is_byte_identical_across_workers(self, tmp_path):
        config = self._write(tmp_path, FIGURES)
        assert main(["--config", config, "--out", str(tmp_path / "w1"), "--workers", "1"]) == EXIT_OK
        assert main(["--config", config, "--out", str(tmp_path / "w2"), "--workers", "2"]) == EXIT_OK
        for k in range(1, 7):
            name = f"fig{k}.csv"
            assert (tmp_path / "w1" / name).read_bytes() == (tmp_path / "w2" / name).read_bytes()

    def test_scene_mode(self, tmp_path):
        out = tmp_path / "scene"
        assert main(["--config", self._write(tmp_path, SCENE), "--out", str(out), "--format", "json"]) == EXIT_OK
        assert read_pfmap(out / "I1.pfmap").shape == (6, 8, 1)
        for kind in ("four_image", "correlated_pair", "osci"):
            assert (out / f"p2_{kind}.pfmap").exists()
            assert (out / f"n_{kind}.pfmap").exists()
        assert (out / "osci.json").exists()
        assert read_pfmap(out / "n_osci.pfmap")[0, 0, 0] == 4.0

    def test_config_error_exit_code(self, tmp_path):
        bad = CAMPAIGN.replace("a1 = 15", "a1 = -1")
        assert main(["--config", self._write(tmp_path, bad), "--out", str(tmp_path)]) == EXIT_CONFIG

    def test_missing_file(self, tmp_path):
        assert main(["--config", str(tmp_path / "absent.cfg")]) == EXIT_CONFIG

    def test_report_error_exit_code(self, tmp_path):
        text = FIGURES.replace("figure_n = 40", "figure_n = 80")
        out = tmp_path / "out"
        assert main(["--config", self._write(tmp_path, text), "--out", str(out)]) == EXIT_RUNTIME
        assert not any(out.glob("fig*"))

    def test_config_and_preset_are_exclusive(self, tmp_path):
        with pytest.raises(SystemExit):
            main(["--config", self._write(tmp_path, CAMPAIGN), "--preset", "paper-default"])

    def test_seed_precedence(self, tmp_path, monkeypatch, capsys):
        config = self._write(tmp_path, CAMPAIGN)
        monkeypatch.setenv("SPECKLE_DOP_SEED", "7")
        assert main(["--config", config, "--dump-config"]) == EXIT_OK
        assert "master_seed = 7" in capsys.readouterr().out
        assert main(["--config", config, "--seed", "9", "--dump-config"]) == EXIT_OK
        assert "master_seed = 9" in capsys.readouterr().out
        monkeypatch.delenv("SPECKLE_DOP_SEED")
        assert main(["--config", config, "--dump-config"]) == EXIT_OK
        assert "master_seed = 5" in capsys.readouterr().out

    def test_invalid_env_seed(self, tmp_path, monkeypatch):
        monkeypatch.setenv("SPECKLE_DOP_SEED", "-3")
        assert main(["--config", self._write(tmp_path, CAMPAIGN), "--dump-config"]) == EXIT_CONFIG

    def test_invalid_env_workers(self, tmp_path, monkeypatch):
        monkeypatch.setenv("SPECKLE_DOP_WORKERS", "many")
        code = main(["--config", self._write(tmp_path, CAMPAIGN), "--out", str(tmp_path / "out")])
        assert code == EXIT_CONFIG
        assert not (tmp_path / "out" / "campaign.csv").exists()

    def _small_preset(self, tmp_path, name):
        config = load_preset(name).model_copy(update={"realizations": 2})
        return self._write(tmp_path, serialize_config(config), name=f"{name}.cfg")

    def test_default_preset_fig1_truth(self, tmp_path):
        out = tmp_path / "default"
        assert main(["--config", self._small_preset(tmp_path, "paper-default"), "--out", str(out)]) == EXIT_OK
        fig1 = pd.read_csv(out / "fig1.csv")
        assert list(fig1["matrix_id"]) == [1, 2, 3, 4, 5, 6]
        expected = [0.1864, 0.4003, 0.5001, 0.5957, 0.7934, 0.9879]
        assert list(fig1["true_p2"]) == pytest.approx(expected, abs=1e-4)

    def test_sweep_preset_fig4_rows(self, tmp_path):
        out = tmp_path / "sweep"
        assert main(["--config", self._small_preset(tmp_path, "paper-sweep"), "--out", str(out)]) == EXIT_OK
        fig4 = pd.read_csv(out / "fig4.csv")
        assert list(fig4["n"]) == [100, 500, 1000, 5000, 10000]

    def test_dump_preset_round_trips(self, capsys):
        assert main(["--preset", "paper-sweep", "--dump-config"]) == EXIT_OK
        assert parse_config(capsys.readouterr().out) == load_preset("paper-sweep")


@pytest.mark.slow
def test_paper_default_is_byte_identical_across_workers(tmp_path):
    for workers in ("1", "8"):
        code = main(["--preset", "paper-default", "--seed", "42", "--workers", workers,
                     "--out", str(tmp_path / workers)])
        assert code == EXIT_OK
    for name in ("fig1.csv", "fig2.csv"):
        assert (tmp_path / "1" / name).read_bytes() == (tmp_path / "8" / name).read_bytes()
