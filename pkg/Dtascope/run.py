from Dtascope.app import create_app

# Build the command group using the factory pattern
app = create_app()

if __name__ == "__main__":
    app()
