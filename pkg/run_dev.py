# development run script
#!/usr/bin/env python
from seqce_app.cli import main

if __name__ == "__main__":
    main()
