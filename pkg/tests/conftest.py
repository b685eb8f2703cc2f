import sys
from pathlib import Path

# make shared oracle helpers importable from any test module
sys.path.insert(0, str(Path(__file__).parent))
