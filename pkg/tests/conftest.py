import sys
from pathlib import Path

# Make sibling helper modules (gradcheck, oracles) importable from any cwd.
sys.path.insert(0, str(Path(__file__).parent))
