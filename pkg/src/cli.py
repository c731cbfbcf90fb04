"""
AsySVRG CLI - 단일 진입점 (Wrapper)
"""

from interface.cli.main import app

if __name__ == "__main__":
    app()
