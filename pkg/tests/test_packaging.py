import re
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def test_requirements_match_install_requires():
    requirements = [line.strip() for line in (ROOT / "requirements.txt").read_text(encoding="utf-8").splitlines()
                    if line.strip() and not line.startswith("#")]
    setup = (ROOT / "setup.py").read_text(encoding="utf-8")
    declared = re.findall(r'"([^"]+)"', re.search(r"install_requires=\[(.*?)\]", setup, re.S).group(1))
    assert requirements == declared
    extras = re.findall(r'"([^"]+)"', re.search(r'"test": \[(.*?)\]', setup, re.S).group(1))
    assert not {name.split(">")[0] for name in extras} & {name.split(">")[0] for name in requirements}
