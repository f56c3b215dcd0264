from src.console.cli import app

if __name__ == "__main__":
    # Redirect to the CLI application
    app()
