import os
import pathlib
import sys

ROOT = pathlib.Path(__file__).resolve().parent.parent

# Tests refer to the shipped corpus by relative path; anchor the working
# directory at the repository root regardless of where pytest is invoked.
os.chdir(ROOT)
sys.path.insert(0, str(ROOT / "tests"))
