"""spinmem: spin-ensemble microwave memory simulator"""
import spinmem.cli

if __name__ == "__main__":
    spinmem.cli.main()
