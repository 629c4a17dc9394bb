"""
anisodrop
Main entry point for the command-line application
"""
import sys
from pathlib import Path

# Add project root to path
project_root = Path(__file__).parent
if str(project_root) not in sys.path:
    sys.path.insert(0, str(project_root))

from cli.app import AnisodropApp

if __name__ == "__main__":
    sys.exit(AnisodropApp().run())
