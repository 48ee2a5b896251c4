#!/usr/bin/env python3
"""
Setup Script for the MAES Laboratory
Installs the packages, creates .env and checks that the toy config loads.
"""

import os
import subprocess
import sys


def check_python():
    """The code uses X | None annotations, so 3.10 is the floor"""
    version = sys.version_info
    if (version.major, version.minor) >= (3, 10):
        print(f"✅ Python {version.major}.{version.minor} - Good!")
        return True
    print(f"❌ Python {version.major}.{version.minor} - Need Python 3.10+")
    return False


def install_packages():
    """Install requirements.txt with the pip of this interpreter"""
    command = [sys.executable, "-m", "pip", "install", "-r", "requirements.txt"]
    print(f"Running: {' '.join(command)}")
    completed = subprocess.run(command, capture_output=True, text=True)
    if completed.returncode != 0:
        print(f"❌ pip failed:\n{completed.stderr}")
        return False
    print("✅ requirements.txt installed")
    return True


def create_env_file():
    """Create .env from .env.example if it doesn't exist"""
    if os.path.exists(".env"):
        print("✅ .env file already exists")
        return True

    if os.path.exists(".env.example"):
        with open(".env.example", "r") as src, open(".env", "w") as dst:
            dst.write(src.read())
        print("✅ Created .env file from .env.example")
    else:
        with open(".env", "w") as f:
            f.write("MAES_LOG_LEVEL=INFO\n")
        print("✅ Created basic .env file")
    return True


def check_installation():
    try:
        from src.expcli import load_config
        config = load_config("configs/toy.json")
    except ImportError as e:
        print(f"❌ Import error: {e}")
        return False
    print(f"✅ Packages import and '{config.name}' loads ({len(config.deltas)} deltas, {len(config.seeds)} seeds)")
    return True


STEPS = [
    ("Checking Python version", check_python),
    ("Installing packages", install_packages),
    ("Setting up .env", create_env_file),
    ("Testing installation", check_installation),
]


def main():
    print("🚀 MAES Laboratory Setup")

    for number, (title, step) in enumerate(STEPS, start=1):
        print(f"\n🔧 [{number}/{len(STEPS)}] {title}")
        if not step():
            print(f"Setup stopped at step {number}. Fix the error above and run setup.py again.")
            return

    print("\n🎉 Setup Complete!")
    print("Next steps:")
    print("1. Run the fast tests: pytest -m 'not slow'")
    print("2. Train one point: python3 -m src.main train --delta 0.2 --seed 0")
    print("3. Run the toy sweep: python3 -m src.main sweep-delta --config configs/toy.json")
    print("4. Read docs/FORMATS.md for what lands under runs/")


if __name__ == "__main__":
    main()
