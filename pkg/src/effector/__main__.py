"""Entry point for running effector as a module: python -m effector"""

from effector.cli import main

if __name__ == "__main__":
    main()
