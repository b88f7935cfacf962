# Generated by Django 4.2.11

from django.db import migrations, models


class Migration(migrations.Migration):

    dependencies = [
        ('ris_sim', '0001_initial'),
    ]

    operations = [
        migrations.AlterField(
            model_name='simulationrun',
            name='seed',
            field=models.CharField(blank=True, max_length=20, null=True),
        ),
    ]
