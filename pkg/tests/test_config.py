from mppsim.config import Settings


class TestSettings:
    def test_defaults(self, monkeypatch, tmp_path):
        monkeypatch.chdir(tmp_path)
        for name in ("RESULTS_DATABASE_URL", "PERSIST_RUNS", "LOG_LEVEL", "DESK_REPETITIONS", "DEFAULT_SEED"):
            monkeypatch.delenv(f"MPPSIM_{name}", raising=False)
        settings = Settings()
        assert settings.results_database_url == "sqlite:///mppsim_runs.db"
        assert settings.persist_runs is False
        assert settings.desk_repetitions == 1000
        assert settings.default_seed == 0

    def test_environment_overrides(self, monkeypatch, tmp_path):
        monkeypatch.chdir(tmp_path)
        monkeypatch.setenv("MPPSIM_DESK_REPETITIONS", "25")
        monkeypatch.setenv("MPPSIM_PERSIST_RUNS", "true")
        monkeypatch.setenv("MPPSIM_LOG_LEVEL", "DEBUG")
        settings = Settings()
        assert settings.desk_repetitions == 25
        assert settings.persist_runs is True
        assert settings.log_level == "DEBUG"

    def test_env_file(self, monkeypatch, tmp_path):
        monkeypatch.chdir(tmp_path)
        monkeypatch.delenv("MPPSIM_DEFAULT_SEED", raising=False)
        (tmp_path / ".env").write_text("MPPSIM_DEFAULT_SEED=42\n", encoding="utf-8")
        assert Settings().default_seed == 42
