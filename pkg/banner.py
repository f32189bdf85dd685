import pyfiglet
import typer


def display_banner():
    banner_text = pyfiglet.figlet_format("EntangleCheck")
    typer.echo(banner_text)
    typer.echo("📌 Cartan towers in GL2(Z/mZ) and their determinant lifts\n")
