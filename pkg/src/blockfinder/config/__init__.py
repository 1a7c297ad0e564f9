from pathlib import Path

from blockfinder.const.experiment import ExperimentConfig

CONFIG_DIR = Path(__file__).parent.resolve()
CASE_STUDY_PATH = CONFIG_DIR / 'case_study.json'


def load_case_study(**overrides) -> ExperimentConfig:
    """The shipped five-currency, 1000-turn case study. Keyword overrides replace
    top-level experiment fields, e.g. load_case_study(queries_per_m=50)
    """
    config = ExperimentConfig.load(CASE_STUDY_PATH)
    if not overrides:
        return config

    dct = config.to_dict()
    dct.update(overrides)
    return ExperimentConfig.from_dict(dct)
