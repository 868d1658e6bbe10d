import sys
from pathlib import Path

# layered packages (ingestion, models, ...) are imported as top-level packages
sys.path.insert(0, str(Path(__file__).resolve().parent))
