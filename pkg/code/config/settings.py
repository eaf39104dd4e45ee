import os
from pathlib import Path
from dotenv import load_dotenv

load_dotenv()


class _Settings:
    ROOT_DIR = Path(__file__).resolve().parents[2]  # repository root
    CODE_DIR = ROOT_DIR / "code"
    CONFIG_DIR = ROOT_DIR / "config"
    CONFIG_YAML_PATH = CONFIG_DIR / "config.yaml"
    MODEL_PRESETS_PATH = CONFIG_DIR / "presets" / "models.yaml"
    HARDWARE_PRESETS_PATH = CONFIG_DIR / "presets" / "hardware.yaml"
    EXPERIMENTS_DIR = CONFIG_DIR / "experiments"

    # Environment overrides: output directory and log level
    OUTPUT_DIR_ENV = os.getenv("MOZART_OUTPUT_DIR") or None
    DEFAULT_OUTPUT_DIR = ROOT_DIR / "output"
    LOG_LEVEL = os.getenv("MOZART_LOG_LEVEL", "INFO").upper()
    LOG_DIR = ROOT_DIR / "logs"

    # FP16 everywhere
    BYTES_PER_ELEMENT: int = 2

    LOGGING_APP_NAME: str = "mozart"

    def output_dir(self, cli_out: str | None = None, config_out: str | None = None) -> Path:
        """--out beats MOZART_OUTPUT_DIR, which beats the experiment file, which beats the default."""
        env_out = os.getenv("MOZART_OUTPUT_DIR") or self.OUTPUT_DIR_ENV
        for candidate in (cli_out, env_out, config_out):
            if candidate:
                return Path(candidate)
        return self.DEFAULT_OUTPUT_DIR


SETTINGS = _Settings()

if __name__ == "__main__":
    print("Settings:")
    print(f"ROOT_DIR: {SETTINGS.ROOT_DIR}")
    print(f"CONFIG_YAML_PATH: {SETTINGS.CONFIG_YAML_PATH}")
    print(f"MODEL_PRESETS_PATH: {SETTINGS.MODEL_PRESETS_PATH}")
    print(f"HARDWARE_PRESETS_PATH: {SETTINGS.HARDWARE_PRESETS_PATH}")
    print(f"OUTPUT_DIR: {SETTINGS.output_dir()}")
