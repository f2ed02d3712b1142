import sys

from liectl.app import main

if __name__ == "__main__":
    sys.exit(main())
